use ecm_core::assets;
use ecm_core::kernel::{MicroOpSpec, OpClass, StreamKind, StreamSpec};
use ecm_core::machine::Capability;
use ecm_core::{KernelModel, MachineModel};
use proptest::prelude::*;

#[test]
fn bundled_files_survive_reserialization() {
    for a in assets::bundled(assets::AssetKind::Kernel) {
        let k = assets::kernel(a.name).unwrap();
        assert_eq!(
            KernelModel::from_toml_str(&k.to_toml_string(), a.name).unwrap(),
            k
        );
    }
    let m = assets::machine("haswell-ep-2695v3").unwrap();
    assert_eq!(
        MachineModel::from_toml_str(&m.to_toml_string(), "m").unwrap(),
        m
    );
}

fn arb_machine() -> impl Strategy<Value = MachineModel> {
    let base = assets::machine("haswell-ep-2695v3").unwrap();
    (
        1.0f64..5.0,
        prop::collection::vec((1u32..200, 1u32..200), 1..4),
        1u32..6,
        1u32..16,
        1.0f64..200.0,
        1u32..9,
        prop::sample::subsequence(base.resources.clone(), 1..=base.resources.len()),
    )
        .prop_map(
            move |(clock, links, domains, cores, bw, retire, resources)| {
                let mut m = base.clone();
                m.core_clock_ghz = clock;
                m.cache_links = links
                    .iter()
                    .enumerate()
                    .map(|(i, &(l, e))| {
                        let mut link = base.cache_links[0].clone();
                        link.name = format!("L{}L{}", i + 1, i + 2);
                        link.load_bandwidth_bpc = l as f64;
                        link.evict_bandwidth_bpc = e as f64;
                        link
                    })
                    .collect();
                m.memory.domains_per_chip = domains;
                m.memory.cores_per_domain = cores;
                m.memory.default_bandwidth_gbs = bw;
                m.retire_width = retire;
                m.resources = resources;
                m
            },
        )
}

fn arb_kernel() -> impl Strategy<Value = KernelModel> {
    let kind = prop_oneof![
        Just(StreamKind::ExplicitLoad),
        Just(StreamKind::Store),
        Just(StreamKind::NtStore)
    ];
    (
        prop::collection::vec(kind, 1..6),
        prop::option::of(1.0f64..100.0),
        prop::collection::vec((1u32..8, any::<bool>()), 1..4),
    )
        .prop_map(|(kinds, bw, ops)| KernelModel {
            name: "gen".into(),
            loop_body: "a[i]=b[i]".into(),
            work_per_cl: 8.0,
            work_unit: "Up".into(),
            sustained_bandwidth_gbs: bw,
            explicit_core: None,
            streams: kinds
                .into_iter()
                .enumerate()
                .map(|(i, kind)| StreamSpec {
                    name: format!("s{i}"),
                    kind,
                    count: 1,
                    overwrites: None,
                })
                .collect(),
            uops: ops
                .into_iter()
                .enumerate()
                .map(|(i, (n, load))| MicroOpSpec {
                    name: format!("op{i}"),
                    count_per_cl: n,
                    eligible: if load {
                        vec!["P2".into(), "P3".into()]
                    } else {
                        vec!["P0".into()]
                    },
                    agu_demand: if load { vec!["AGU2".into()] } else { vec![] },
                    op_class: if load {
                        OpClass::DataTransfer
                    } else {
                        OpClass::Overlapping
                    },
                })
                .collect(),
        })
}

proptest! {
    #[test]
    fn machine_round_trip(m in arb_machine()) {
        prop_assert_eq!(MachineModel::from_toml_str(&m.to_toml_string(), "gen").unwrap(), m);
    }

    #[test]
    fn kernel_round_trip(k in arb_kernel()) {
        prop_assert_eq!(KernelModel::from_toml_str(&k.to_toml_string(), "gen").unwrap(), k);
    }
}

#[test]
fn capabilities_are_a_closed_set() {
    let text = assets::BUNDLED[0]
        .text
        .replacen("\"load\"", "\"teleport\"", 1);
    let err = MachineModel::from_toml_str(&text, "m")
        .unwrap_err()
        .to_string();
    assert!(err.contains("teleport"), "{err}");
    assert!(Capability::Load.is_data_transfer());
    assert!(!Capability::Fma.is_data_transfer());
}
