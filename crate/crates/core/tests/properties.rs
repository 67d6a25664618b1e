use nanosim::devices::{MosModel, NanowireModel, RtdModel};
use nanosim::mna::{LuFactors, MnaSystem};
use nanosim::netlist::{format_value, parse_netlist, parse_value, Pulse, Waveform};
use nanosim::swec::{next_step_size, operating_point, SimConfig};
use nanosim::{Circuit, FlopCounter};
use proptest::prelude::*;

fn rtd_strategy() -> impl Strategy<Value = RtdModel> {
    (
        -6.0..-2.0f64,
        0.0..5.0f64,
        0.0..5.0f64,
        0.05..1.0f64,
        -10.0..-6.0f64,
        0.05..1.0f64,
        0.001..0.1f64,
        200.0..400.0f64,
        0.1..10.0f64,
    )
        .prop_map(|(a, b, cp, d, h, n1, n2, temp, area)| RtdModel {
            a: 10f64.powf(a),
            b,
            cp,
            d,
            h: 10f64.powf(h),
            n1,
            n2,
            temp,
            area,
        })
}

proptest! {
    #[test]
    fn rtd_geq_positive_and_consistent(m in rtd_strategy(), v in -20.0..20.0f64) {
        let g = m.geq(v);
        prop_assert!(g.is_finite() && g >= 0.0);
        if v.abs() > 1e-3 {
            let j = m.current(v);
            prop_assert!((g * v - j).abs() <= 1e-12 * j.abs().max(1e-300));
        }
    }

    #[test]
    fn value_format_round_trips(x in prop::num::f64::NORMAL) {
        prop_assert_eq!(parse_value(&format_value(x)), Some(x));
    }

    #[test]
    fn pwl_is_lipschitz(
        steps in prop::collection::vec((1e-12..1e-9f64, -5.0..5.0f64), 1..8),
        t1 in 0.0..1e-8f64,
        t2 in 0.0..1e-8f64,
    ) {
        let mut t = 0.0;
        let points: Vec<(f64, f64)> = steps
            .into_iter()
            .map(|(dt, v)| {
                t += dt;
                (t, v)
            })
            .collect();
        let w = Waveform::Pwl(points);
        prop_assume!(w.validate().is_ok());
        let bound = w.max_slope() * (t1 - t2).abs();
        prop_assert!((w.eval(t1) - w.eval(t2)).abs() <= bound * (1.0 + 1e-9) + 1e-12);
    }

    #[test]
    fn pulse_stays_between_levels(v1 in -5.0..5.0f64, v2 in -5.0..5.0f64, t in 0.0..1e-7f64) {
        let p = Pulse {
            v1,
            v2,
            delay: 1e-9,
            rise: 1e-10,
            fall: 2e-10,
            width: 3e-9,
            period: 1e-8,
        };
        let v = Waveform::Pulse(p).eval(t);
        prop_assert!(v >= v1.min(v2) - 1e-12 && v <= v1.max(v2) + 1e-12);
    }

    #[test]
    fn conductance_stamps_add(g1 in 1e-9..1.0f64, g2 in 1e-9..1.0f64, scale in 0.1..10.0f64) {
        let ckt = compile("V1 a 0 1\nR1 a b 1k\nR2 b 0 1k\n.end\n");
        let (a, b) = (ckt.node("a"), ckt.node("b"));
        let mut fc = FlopCounter::ZERO;
        let mut split = MnaSystem::new(&ckt);
        split.stamp_conductance(a, b, g1, &mut fc);
        split.stamp_conductance(a, b, g2, &mut fc);
        let mut joint = MnaSystem::new(&ckt);
        joint.stamp_conductance(a, b, g1 + g2, &mut fc);
        let mut single = MnaSystem::new(&ckt);
        single.stamp_conductance(a, b, g1, &mut fc);
        let mut scaled = MnaSystem::new(&ckt);
        scaled.stamp_conductance(a, b, scale * g1, &mut fc);
        for i in 0..ckt.dim() {
            for j in 0..ckt.dim() {
                prop_assert!((split.at(i, j) - joint.at(i, j)).abs() <= 1e-15 * (g1 + g2));
                prop_assert!((scaled.at(i, j) - scale * single.at(i, j)).abs() <= 1e-15 * scale * g1);
            }
        }
    }

    #[test]
    fn lu_solves_diagonally_dominant(seed in 0u64..1000, n in 1usize..12) {
        let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1);
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        let mut a: Vec<f64> = (0..n * n).map(|_| next()).collect();
        for i in 0..n {
            a[i * n + i] += n as f64;
        }
        let x: Vec<f64> = (0..n).map(|_| next()).collect();
        let b: Vec<f64> = (0..n).map(|i| (0..n).map(|j| a[i * n + j] * x[j]).sum()).collect();
        let mut fc = FlopCounter::ZERO;
        let lu = LuFactors::factor(a, n, &mut fc).unwrap();
        let got = lu.solve(&b, &mut fc);
        for (g, w) in got.iter().zip(&x) {
            prop_assert!((g - w).abs() < 1e-10);
        }
    }

    #[test]
    fn nanowire_current_monotone(
        g0 in 1e-6..1e-3f64,
        vstep in 0.1..1.0f64,
        nsteps in 1u32..6,
        smooth in 0.01..0.2f64,
        v in -5.0..5.0f64,
        dv in 0.0..0.5f64,
    ) {
        let m = NanowireModel { g0, vstep, nsteps, smooth };
        prop_assert!(m.current(v + dv) >= m.current(v) - 1e-18);
        prop_assert!(m.geq(v) > 0.0);
    }

    #[test]
    fn mos_current_continuous(vgs in -1.0..5.0f64, vds in 0.0..5.0f64) {
        let m = MosModel { k: 1e-4, w: 2e-6, l: 1e-6, vth: 1.0 };
        let d = 1e-9;
        for (a, b) in [((vgs, vds), (vgs + d, vds)), ((vgs, vds), (vgs, vds + d))] {
            prop_assert!((m.current(a.0, a.1) - m.current(b.0, b.1)).abs() <= 1e-3 * d * 10.0);
        }
        prop_assert!(m.geq(vgs, vds) >= 0.0);
    }

    #[test]
    fn step_size_within_bounds(
        terms in prop::collection::vec((0.0..1e-11f64, 0.0..1e-2f64), 0..6),
        bounds in prop::collection::vec(1e-13..1e-6f64, 0..4),
        eps in 1e-4..0.5f64,
    ) {
        let h = next_step_size(&terms, &bounds, eps, 1e-15, 1e-9);
        prop_assert!((1e-15..=1e-9).contains(&h));
    }

    #[test]
    fn ladder_operating_point_satisfies_kcl(rs in prop::collection::vec(10.0..1e5f64, 2..6), vs in 0.1..10.0f64) {
        let mut deck = format!("V1 n0 0 {vs}\n");
        for (i, r) in rs.iter().enumerate() {
            deck.push_str(&format!("RS{i} n{i} n{} {r}\nRP{i} n{} 0 {}\n", i + 1, i + 1, r * 2.0));
        }
        deck.push_str(".end\n");
        let ckt = compile(&deck);
        let op = operating_point(&ckt, &SimConfig::default()).unwrap();
        let kcl = ckt.kcl_residual(&op.x).iter().fold(0.0f64, |m, r| m.max(r.abs()));
        prop_assert!(kcl <= 1e-9 * ckt.current_scale(&op.x));
    }
}

fn compile(src: &str) -> Circuit {
    Circuit::compile(&parse_netlist(src).unwrap()).unwrap()
}

#[test]
fn lu_flops_scale_cubically() {
    let dims = [10usize, 20, 40, 80];
    let counts: Vec<f64> = dims
        .iter()
        .map(|&n| {
            // Dense: zero multipliers are skipped, so a sparse matrix would cost less.
            let mut a = vec![1.0; n * n];
            for i in 0..n {
                a[i * n + i] = n as f64;
            }
            let mut fc = FlopCounter::ZERO;
            LuFactors::factor(a, n, &mut fc).unwrap();
            fc.total() as f64
        })
        .collect();
    let lx: Vec<f64> = dims.iter().map(|&n| (n as f64).ln()).collect();
    let ly: Vec<f64> = counts.iter().map(|c| c.ln()).collect();
    let mx = lx.iter().sum::<f64>() / 4.0;
    let my = ly.iter().sum::<f64>() / 4.0;
    let slope = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
        / lx.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
    assert!((2.7..=3.2).contains(&slope), "slope {slope}");
    // Exact count: n(n-1)/2 divisions plus (n-1)n(2n-1)/6 multiply-adds.
    let n = 80.0;
    let exact = n * (n - 1.0) / 2.0 + 2.0 * (n - 1.0) * n * (2.0 * n - 1.0) / 6.0;
    assert_eq!(counts[3], exact);
}

#[test]
fn every_deck_parses_and_round_trips() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../decks");
    let mut seen = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "ckt") {
            let text = std::fs::read_to_string(&path).unwrap();
            let net = parse_netlist(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            let again = parse_netlist(&net.to_string()).unwrap();
            assert_eq!(net, again, "{}", path.display());
            Circuit::compile(&net).unwrap();
            seen += 1;
        }
    }
    assert!(seen >= 8);
}

/// Replays the checked-in fuzz seeds through the fuzz-target invariants.
#[test]
fn fuzz_seeds_hold_invariants() {
    let corpus = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus");
    let seeds = |target: &str| -> Vec<String> {
        let mut out: Vec<String> = std::fs::read_dir(corpus.join(target))
            .unwrap()
            .map(|e| std::fs::read_to_string(e.unwrap().path()).unwrap())
            .collect();
        out.sort();
        assert!(!out.is_empty(), "{target}");
        out
    };
    for text in seeds("parse_value") {
        let v = parse_value(&text).unwrap_or_else(|| panic!("{text:?}"));
        assert_eq!(parse_value(&format_value(v)), Some(v));
    }
    for text in seeds("parse_element_card") {
        nanosim::netlist::parse_element_card(&text).unwrap_or_else(|e| panic!("{text:?}: {e}"));
    }
    for text in seeds("netlist_roundtrip").into_iter().chain(seeds("parse_netlist")) {
        let net = parse_netlist(&text).unwrap();
        assert_eq!(parse_netlist(&net.to_string()).unwrap(), net);
    }
}
