//! Shorthand notation for model inputs and predictions.
//!
//! Input: `{T_OL || T_nOL | T_L1L2 | T_L2L3 | T_L3Mem} cy/CL`
//! (Unicode: `‖` for `||`). Prediction: `{L1 ] L2 ] L3 ] Mem} cy/CL`
//! (Unicode: `⌉`). Numbers are shown with at most one decimal.
//!
//! Input grammar accepted by [`parse_shorthand`]:
//!
//! ```text
//! input := '{' num ('||' | '‖') num ('|' num)+ '}' [ 'cy/CL' ]
//! num   := decimal numeral, e.g. 4, 9.1, 0.25
//! ```
//!
//! Whitespace between tokens is ignored.

use crate::error::{Error, Result};
use crate::model::{EcmInput, EcmPrediction};
use crate::units::fmt_cycles;

pub const UNIT: &str = "cy/CL";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Style {
    #[default]
    Ascii,
    Unicode,
}

impl Style {
    fn overlap_sep(self) -> &'static str {
        match self {
            Style::Ascii => "||",
            Style::Unicode => "‖",
        }
    }

    fn level_sep(self) -> &'static str {
        match self {
            Style::Ascii => "]",
            Style::Unicode => "⌉",
        }
    }
}

pub fn format_shorthand(input: &EcmInput, style: Style) -> String {
    let mut s = format!(
        "{{{} {} {}",
        fmt_cycles(input.t_ol_cy),
        style.overlap_sep(),
        fmt_cycles(input.t_nol_cy)
    );
    for t in &input.t_data_cy {
        s.push_str(" | ");
        s.push_str(&fmt_cycles(*t));
    }
    s.push_str("} ");
    s.push_str(UNIT);
    s
}

pub fn format_prediction(pred: &EcmPrediction, style: Style) -> String {
    let sep = format!(" {} ", style.level_sep());
    let body: Vec<String> = pred.levels.iter().map(|l| fmt_cycles(l.cycles)).collect();
    format!("{{{}}} {UNIT}", body.join(&sep))
}

struct Cursor<'a> {
    text: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn err<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(Error::Notation {
            pos: self.pos,
            message: message.into(),
        })
    }

    fn rest(&self) -> &'a str {
        &self.text[self.pos..]
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.text.len() - trimmed.len();
    }

    fn eat(&mut self, token: &str) -> bool {
        self.skip_ws();
        if self.rest().starts_with(token) {
            self.pos += token.len();
            true
        } else {
            false
        }
    }

    fn number(&mut self) -> Result<f64> {
        self.skip_ws();
        let len = self
            .rest()
            .find(|c: char| !(c.is_ascii_digit() || c == '.'))
            .unwrap_or(self.rest().len());
        let lit = &self.rest()[..len];
        let valid = !lit.is_empty()
            && lit.matches('.').count() <= 1
            && !lit.starts_with('.')
            && !lit.ends_with('.');
        if !valid {
            return self.err("expected a decimal number");
        }
        let v: f64 = lit.parse().or_else(|_| self.err("bad number"))?;
        self.pos += len;
        Ok(v)
    }
}

pub fn parse_shorthand(s: &str) -> Result<EcmInput> {
    let mut c = Cursor { text: s, pos: 0 };
    if !c.eat("{") {
        return c.err("expected `{`");
    }
    let t_ol_cy = c.number()?;
    if !(c.eat("||") || c.eat("‖")) {
        return c.err("expected `||` after T_OL");
    }
    let t_nol_cy = c.number()?;
    let mut t_data_cy = Vec::new();
    // a lone `|` separates data terms; `||` was consumed above
    while c.eat("|") {
        t_data_cy.push(c.number()?);
    }
    if t_data_cy.is_empty() {
        return c.err("expected at least one `| T_data` term");
    }
    if !c.eat("}") {
        return c.err("expected `|` or `}`");
    }
    c.eat(UNIT);
    c.skip_ws();
    if !c.rest().is_empty() {
        return c.err("unexpected trailing text");
    }
    Ok(EcmInput {
        t_ol_cy,
        t_nol_cy,
        t_data_cy,
    })
}
