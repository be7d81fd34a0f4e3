//! Property tests for the invariants of each module.

use std::sync::{Arc, OnceLock};

use itercomm::conditions::{s_ab, s_p, t_c, t_p, SymbolPair};
use itercomm::gallery::{by_name, random_smooth, Piece, PiecewiseFunction};
use itercomm::grid::{average, lp_average, CellIntegrator, Domain, DyadicInterval, Interval, SampledFunction};
use itercomm::singular::{
    commutator_apply, commutator_apply_nested, operator_norm, truncated_maximal, KernelOperator, NormOptions,
};
use itercomm::sparse::{build_sparse, cz_decompose, default_root, verify_domination, SparseConfig};
use itercomm::young::{luxemburg, YoungFunction};
use itercomm::Complex64;
use proptest::prelude::*;

fn cfg(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, ..ProptestConfig::default() }
}

fn complex_vec(n: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec((-10.0..10.0f64, -10.0..10.0f64), n)
        .prop_map(|v| v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect())
}

fn real_vec(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0..10.0f64, n)
}

fn domain(n: usize) -> Domain {
    Domain::new(-2.0, 2.0, n).unwrap()
}

fn sample(d: Domain, v: Vec<Complex64>) -> SampledFunction {
    SampledFunction::from_values(d, v).unwrap()
}

fn interval(d: Domain) -> impl Strategy<Value = Interval> {
    let n = d.n_cells();
    (0..n).prop_flat_map(move |s| (Just(s), 1..=n - s)).prop_map(move |(s, l)| Interval::new(d, s, l).unwrap())
}

fn dot(a: &SampledFunction, b: &SampledFunction) -> Complex64 {
    a.values().iter().zip(b.values()).map(|(x, y)| x * y.conj()).sum()
}

fn rel_diff(a: &SampledFunction, b: &SampledFunction) -> f64 {
    a.sub(b).unwrap().l2_norm() / a.l2_norm().max(b.l2_norm()).max(f64::MIN_POSITIVE)
}

fn families() -> &'static Vec<(YoungFunction, YoungFunction)> {
    static F: OnceLock<Vec<(YoungFunction, YoungFunction)>> = OnceLock::new();
    F.get_or_init(|| {
        [
            YoungFunction::power(1.5).unwrap(),
            YoungFunction::power(3.0).unwrap(),
            YoungFunction::log_bump(2.0, 1.0).unwrap(),
            YoungFunction::loglog_bump(2.0, 0.5).unwrap(),
            YoungFunction::phi0(),
        ]
        .into_iter()
        .map(|a| {
            let c = a.complementary().unwrap();
            (a, c)
        })
        .collect()
    })
}

// grid

proptest! {
    #![proptest_config(cfg(64))]

    #[test]
    fn average_is_linear(
        f in complex_vec(64),
        g in complex_vec(64),
        (ar, ai, br, bi) in (-5.0..5.0f64, -5.0..5.0f64, -5.0..5.0f64, -5.0..5.0f64),
        q in interval(domain(64)),
    ) {
        let d = domain(64);
        let (a, b) = (Complex64::new(ar, ai), Complex64::new(br, bi));
        let (f, g) = (sample(d, f), sample(d, g));
        let lhs = average(&f.scale(a).add(&g.scale(b)).unwrap(), &q).unwrap();
        let rhs = a * average(&f, &q).unwrap() + b * average(&g, &q).unwrap();
        let scale = 1.0 + a.norm() * 10.0 + b.norm() * 10.0;
        prop_assert!((lhs - rhs).norm() <= 1e-13 * scale);
    }

    #[test]
    fn lp_average_is_monotone_in_p(
        f in complex_vec(64),
        q in interval(domain(64)),
        p in 1.0..4.0f64,
        dp in 0.0..4.0f64,
    ) {
        let f = sample(domain(64), f);
        let lo = lp_average(&f, &q, p).unwrap();
        let hi = lp_average(&f, &q, p + dp).unwrap();
        prop_assert!(lo <= hi * (1.0 + 1e-12));
    }

    #[test]
    fn exact_averages_survive_refinement(
        coef in 0.1..3.0f64,
        exp in -0.9..2.0f64,
        level in 1u32..5,
        index_frac in 0.0..1.0f64,
    ) {
        // u = x + 2 > 0 on [-2, 2), singular at the left end for exp < 0
        let pf = Arc::new(PiecewiseFunction::new().with(-2.0, 2.0, Piece::pow(coef, 1.0, 2.0, exp)));
        let d = domain(256);
        let coarse = pf.sample(d).unwrap();
        let fine = pf.sample(d.refined(1).unwrap()).unwrap();
        let index = ((index_frac * (1 << level) as f64) as usize).min((1 << level) - 1);
        let qc = DyadicInterval::new(d, level, index).unwrap().interval();
        let qf = DyadicInterval::new(*fine.domain(), level, index).unwrap().interval();
        let a = average(&coarse, &qc).unwrap();
        let b = average(&fine, &qf).unwrap();
        prop_assert!((a - b).norm() <= 1e-13 * a.norm());
    }

    #[test]
    fn cell_means_subdivide_exactly(
        coef in 0.1..3.0f64,
        exp in -0.9..2.0f64,
        a in 0.0..1.9f64,
        w in 1e-6..0.1f64,
    ) {
        let pf = PiecewiseFunction::new()
            .with(-2.0, 0.0, Piece::Const(coef))
            .with(0.0, 2.0, Piece::pow(coef, 1.0, 0.0, exp));
        let b = (a + w).min(2.0);
        let m = 0.5 * (a + b);
        let parent = pf.mean(a, b);
        let children = 0.5 * (pf.mean(a, m) + pf.mean(m, b));
        prop_assert!((parent - children).norm() <= 1e-13 * parent.norm());
    }
}

// young

proptest! {
    #![proptest_config(cfg(256))]

    #[test]
    fn duality_sandwich(k in 0usize..5, log_t in -4.0..8.0f64) {
        let (a, c) = &families()[k];
        let t = 10f64.powf(log_t);
        let prod = a.inverse(t).unwrap() * c.inverse(t).unwrap();
        prop_assert!(prod >= t * (1.0 - 1e-6), "{a}: {prod} < {t}");
        prop_assert!(prod <= 2.0 * t * (1.0 + 1e-6), "{a}: {prod} > 2 x {t}");
    }
}

proptest! {
    #![proptest_config(cfg(64))]

    #[test]
    fn generalized_holder(k in 0usize..5, f in real_vec(32), g in real_vec(32), q in interval(domain(32))) {
        let d = domain(32);
        let (a, c) = &families()[k];
        let f = SampledFunction::from_real(d, &f).unwrap();
        let g = SampledFunction::from_real(d, &g).unwrap();
        let lhs = q.cells().map(|i| (f.value(i) * g.value(i)).norm()).sum::<f64>() / q.len() as f64;
        let rhs = 2.0 * luxemburg(&f, &q, a).unwrap() * luxemburg(&g, &q, c).unwrap();
        prop_assert!(lhs <= rhs * (1.0 + 1e-8), "{a}: {lhs} > {rhs}");
    }

    #[test]
    fn luxemburg_is_homogeneous(k in 0usize..5, f in complex_vec(32), c in 1e-3..1e3f64, q in interval(domain(32))) {
        let d = domain(32);
        let (a, _) = &families()[k];
        let f = sample(d, f);
        let base = luxemburg(&f, &q, a).unwrap();
        let scaled = luxemburg(&f.scale(Complex64::new(0.0, c)), &q, a).unwrap();
        prop_assert!((scaled - c * base).abs() <= 1e-9 * c * base);
    }
}

// conditions

fn pair_of(d: Domain, b1: Vec<Complex64>, b2: Vec<Complex64>) -> SymbolPair {
    SymbolPair::from_samples(sample(d, b1), sample(d, b2), "random").unwrap()
}

proptest! {
    #![proptest_config(cfg(64))]

    #[test]
    fn conditions_ignore_added_constants(
        b1 in complex_vec(64),
        b2 in complex_vec(64),
        (c1r, c1i, c2r, c2i) in (-50.0..50.0f64, -50.0..50.0f64, -50.0..50.0f64, -50.0..50.0f64),
        q in interval(domain(64)),
        p in 1.0..4.0f64,
    ) {
        let pair = pair_of(domain(64), b1, b2);
        let moved = pair.translated(Complex64::new(c1r, c1i), Complex64::new(c2r, c2i));
        let s = s_p(&pair, &q, p).unwrap();
        let t = t_p(&pair, &q, p).unwrap();
        prop_assert!((s_p(&moved, &q, p).unwrap() - s).abs() <= 1e-12 * s.max(1.0) * 1e2);
        prop_assert!((t_p(&moved, &q, p).unwrap() - t).abs() <= 1e-12 * t.max(1.0) * 1e2);
    }

    #[test]
    fn conditions_are_monotone_in_p(
        b1 in complex_vec(64),
        b2 in complex_vec(64),
        q in interval(domain(64)),
        p in 1.0..4.0f64,
        dp in 0.0..3.0f64,
    ) {
        let pair = pair_of(domain(64), b1, b2);
        prop_assert!(s_p(&pair, &q, p).unwrap() <= s_p(&pair, &q, p + dp).unwrap() * (1.0 + 1e-12));
        prop_assert!(t_p(&pair, &q, p).unwrap() <= t_p(&pair, &q, p + dp).unwrap() * (1.0 + 1e-12));
    }

    #[test]
    fn coupled_oscillation_obeys_cauchy_schwarz(
        b1 in complex_vec(64),
        b2 in complex_vec(64),
        q in interval(domain(64)),
        p in 1.0..4.0f64,
    ) {
        let pair = pair_of(domain(64), b1, b2);
        prop_assert!(t_p(&pair, &q, p).unwrap() <= s_p(&pair, &q, 2.0 * p).unwrap() * (1.0 + 1e-12));
    }

    #[test]
    fn power_young_functions_reproduce_power_conditions(
        b1 in complex_vec(32),
        b2 in complex_vec(32),
        q in interval(domain(32)),
        p in 1.1..4.0f64,
    ) {
        let pair = pair_of(domain(32), b1, b2);
        let a = YoungFunction::power(p).unwrap();
        let (s, t) = (s_p(&pair, &q, p).unwrap(), t_p(&pair, &q, p).unwrap());
        prop_assert!((s_ab(&pair, &q, &a, &a).unwrap() - s).abs() <= 1e-8 * s.max(1e-300));
        prop_assert!((t_c(&pair, &q, &a).unwrap() - t).abs() <= 1e-8 * t.max(1e-300));
    }

    #[test]
    fn conditions_are_dilation_invariant(
        freqs in (0.5..5.0f64, 0.5..5.0f64),
        q in interval(domain(64)),
        p in 1.0..3.0f64,
    ) {
        let (w1, w2) = freqs;
        let sym = |d: Domain, s: f64| {
            let b1 = SampledFunction::from_midpoints(d, |x| Complex64::new((w1 * x / s).sin(), 0.0)).unwrap();
            let b2 = SampledFunction::from_midpoints(d, |x| Complex64::new((w2 * x / s).cos(), (x / s).sin())).unwrap();
            SymbolPair::from_samples(b1, b2, "dilated").unwrap()
        };
        let d1 = domain(64);
        let d2 = Domain::new(-4.0, 4.0, 64).unwrap();
        let (a, b) = (sym(d1, 1.0), sym(d2, 2.0));
        let q2 = Interval::new(d2, q.start(), q.len()).unwrap();
        let (s1, s2) = (s_p(&a, &q, p).unwrap(), s_p(&b, &q2, p).unwrap());
        let (t1, t2) = (t_p(&a, &q, p).unwrap(), t_p(&b, &q2, p).unwrap());
        prop_assert!((s1 - s2).abs() <= 1e-12 * s1.max(1.0));
        prop_assert!((t1 - t2).abs() <= 1e-12 * t1.max(1.0));
    }
}

// singular

proptest! {
    #![proptest_config(cfg(32))]

    #[test]
    fn quadrature_is_antisymmetric(f in real_vec(128), g in real_vec(128), k in 1usize..4) {
        let d = domain(128);
        let f = SampledFunction::from_real(d, &f).unwrap();
        let g = SampledFunction::from_real(d, &g).unwrap();
        for op in [
            KernelOperator::quadrature(d),
            KernelOperator::quadrature_with_epsilon(d, k as f64 * d.cell_width()).unwrap(),
        ] {
            let a = dot(&op.apply(&f).unwrap(), &g);
            let b = dot(&f, &op.apply(&g).unwrap());
            let scale = f.l2_norm() * g.l2_norm();
            prop_assert!((a + b).norm() <= 1e-12 * scale);
        }
    }

    #[test]
    fn spectral_multiplier_is_bounded_by_pi(f in complex_vec(128)) {
        let d = domain(128);
        let f = sample(d, f);
        let hf = KernelOperator::spectral(d).apply(&f).unwrap();
        prop_assert!(hf.l2_norm() <= std::f64::consts::PI * f.l2_norm() * (1.0 + 1e-12));
    }

    #[test]
    fn commutator_ignores_added_constants(
        b1 in complex_vec(128),
        b2 in complex_vec(128),
        f in complex_vec(128),
        (c1, c2) in (-20.0..20.0f64, -20.0..20.0f64),
        spectral in any::<bool>(),
    ) {
        let d = domain(128);
        let op = if spectral { KernelOperator::spectral(d) } else { KernelOperator::quadrature(d) };
        let pair = pair_of(d, b1, b2);
        let moved = pair.translated(Complex64::new(c1, 0.0), Complex64::new(0.0, c2));
        let f = sample(d, f);
        let a = commutator_apply(&op, &pair, &f).unwrap();
        let b = commutator_apply(&op, &moved, &f).unwrap();
        // cancellation of the constants costs a factor (1 + |c|)^2 in round-off
        let amp = (1.0 + c1.abs() / 10.0) * (1.0 + c2.abs() / 10.0);
        prop_assert!(rel_diff(&a, &b) <= 1e-11 * amp * amp, "{}", rel_diff(&a, &b));
    }

    #[test]
    fn commutator_is_linear_in_f(
        b1 in complex_vec(128),
        b2 in complex_vec(128),
        f in complex_vec(128),
        g in complex_vec(128),
        (ar, ai) in (-3.0..3.0f64, -3.0..3.0f64),
    ) {
        let d = domain(128);
        let op = KernelOperator::quadrature(d);
        let pair = pair_of(d, b1, b2);
        let a = Complex64::new(ar, ai);
        let (f, g) = (sample(d, f), sample(d, g));
        let lhs = commutator_apply(&op, &pair, &f.scale(a).add(&g).unwrap()).unwrap();
        let rhs = commutator_apply(&op, &pair, &f).unwrap().scale(a).add(&commutator_apply(&op, &pair, &g).unwrap()).unwrap();
        prop_assert!(rel_diff(&lhs, &rhs) <= 1e-12);
    }

    #[test]
    fn nested_and_expanded_commutators_agree(b1 in complex_vec(128), b2 in complex_vec(128), f in complex_vec(128)) {
        let d = domain(128);
        let op = KernelOperator::quadrature(d);
        let pair = pair_of(d, b1, b2);
        let f = sample(d, f);
        let a = commutator_apply(&op, &pair, &f).unwrap();
        let b = commutator_apply_nested(&op, &pair, &f).unwrap();
        prop_assert!(rel_diff(&a, &b) <= 1e-12);
    }

    #[test]
    fn maximal_truncation_dominates_the_transform(f in complex_vec(128)) {
        let d = domain(128);
        let op = KernelOperator::quadrature(d);
        let f = sample(d, f);
        let star = truncated_maximal(&op, &f).unwrap();
        let full = op.apply(&f).unwrap();
        for (s, t) in star.values().iter().zip(full.values()) {
            prop_assert!(s.re >= t.norm() * (1.0 - 1e-12));
        }
    }
}

#[test]
fn norm_estimate_grows_under_refinement() {
    // a finite section of a fixed continuum operator can only gain norm
    let pair = by_name("bmo_log", 0).unwrap();
    let opts = NormOptions::default();
    let norms: Vec<f64> = [512, 1024, 2048]
        .iter()
        .map(|&n| {
            let d = Domain::new(-4.0, 4.0, n).unwrap();
            operator_norm(&KernelOperator::quadrature(d), &pair.sample(d).unwrap(), &opts)
                .unwrap()
                .value
        })
        .collect();
    assert!(norms.windows(2).all(|w| w[1] >= w[0] * (1.0 - 1e-6)), "{norms:?}");
}

// sparse

/// Flags with at most `max_density * n` set cells, in short runs.
fn flags(n: usize, max_density: f64) -> impl Strategy<Value = Vec<bool>> {
    (0.0..max_density, any::<u64>()).prop_map(move |(density, seed)| {
        let mut state = seed | 1;
        let mut next = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            state
        };
        let mut e = vec![false; n];
        let target = (density * n as f64) as usize;
        let mut set = 0;
        while set < target {
            let start = (next() % n as u64) as usize;
            let len = 1 + (next() % 8) as usize;
            for x in e.iter_mut().skip(start).take(len) {
                if !*x && set < target {
                    *x = true;
                    set += 1;
                }
            }
        }
        e
    })
}

proptest! {
    #![proptest_config(cfg(128))]

    #[test]
    fn cz_cubes_are_maximal_disjoint_and_cover(
        (e, height) in (0.1..0.45f64).prop_flat_map(|h| (flags(256, h), Just(h))),
    ) {
        let d = Domain::new(0.0, 1.0, 256).unwrap();
        let q = DyadicInterval::root(d);
        let count = |p: &DyadicInterval| p.interval().cells().filter(|&i| e[i]).count();
        let dense = |p: &DyadicInterval| count(p) as f64 > height * p.n_cells() as f64;
        let cubes = cz_decompose(&e, &q, height).unwrap();
        let mut owner = vec![false; 256];
        for p in &cubes {
            prop_assert!(p.level() > 0 && dense(p));
            prop_assert!(count(p) < p.n_cells(), "cube inside E");
            // maximal: the parent is Q itself or not dense
            if p.level() > 1 {
                let parent = DyadicInterval::new(d, p.level() - 1, p.index() / 2).unwrap();
                prop_assert!(!dense(&parent));
            }
            for i in p.interval().cells() {
                prop_assert!(!owner[i], "overlap at {i}");
                owner[i] = true;
            }
        }
        // a single cell of E is dense, so its maximal dense ancestor covers it
        prop_assert!((0..256).all(|i| !e[i] || owner[i]));
    }
}

proptest! {
    #![proptest_config(cfg(12))]

    #[test]
    fn sparse_families_are_sparse_and_decay(seed in 0u64..1000, pair_name in prop::sample::select(vec!["bmo_log", "smooth_random", "constant"])) {
        let (d, root) = default_root(256).unwrap();
        let pair = by_name(pair_name, seed).unwrap().sample(d).unwrap();
        let op = KernelOperator::quadrature(d);
        let f = random_smooth(d, seed);
        let fam = build_sparse(&op, &pair, &f, &root, &SparseConfig::default()).unwrap();
        fam.check_sparseness().unwrap();
        prop_assert!(fam.gamma >= 0.5);
        let root_len = root.interval().measure();
        for (k, mass) in fam.mass_by_depth() {
            prop_assert!(mass <= root_len / f64::powi(2.0, k as i32) * (1.0 + 1e-12), "depth {k}: {mass}");
        }
        let dom = verify_domination(&op, &pair, &f, &fam).unwrap();
        prop_assert!(dom.max_ratio.is_finite() && dom.violation_cells.is_empty());
    }
}
