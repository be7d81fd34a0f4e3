//! Acceptance criteria, one `[PASS]`/`[FAIL]` line each. Exits non-zero if
//! any criterion fails. Runtimes are part of each criterion.

use std::sync::Arc;
use std::time::{Duration, Instant};

use itercomm::conditions::{
    lower_bound_pairings, scan_condition, scan_refinements, ConditionSpec, SymbolPair,
};
use itercomm::gallery::{
    by_name, commutator_norm_on, make_jnce1_pair, make_prop41_pair, random_smooth, witness_domain,
    witness_f, PiecewiseFunction, Piece,
};
use itercomm::grid::{gauss_legendre, lp_average, Domain, Interval, SampledFunction, ScanSchedule};
use itercomm::singular::{commutator_apply, operator_norm, KernelOperator, NormOptions};
use itercomm::sparse::{
    build_sparse, default_root, sparse_bound_l2, verify_domination, SparseConfig, YoungTriple,
};
use itercomm::young::{luxemburg, YoungFunction};
use itercomm::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

struct Criterion {
    id: u32,
    name: &'static str,
    limit: Duration,
    run: fn() -> Outcome,
}

fn main() {
    let criteria = [
        Criterion { id: 1, name: "double-average identities", limit: Duration::from_secs(1), run: identities },
        Criterion { id: 2, name: "Young duality", limit: Duration::from_secs(5), run: duality },
        Criterion { id: 3, name: "generalized Hölder", limit: Duration::from_secs(10), run: holder },
        Criterion { id: 4, name: "Luxemburg vs power means", limit: Duration::from_secs(10), run: luxemburg_power },
        Criterion { id: 5, name: "jnce1 two-sidedness", limit: Duration::from_secs(120), run: jnce1 },
        Criterion { id: 6, name: "prop41 separation", limit: Duration::from_secs(30), run: prop41 },
        Criterion { id: 7, name: "sparse construction", limit: Duration::from_secs(180), run: sparse_construction },
        Criterion { id: 8, name: "Hilbert cross-validation", limit: Duration::from_secs(10), run: hilbert },
        Criterion { id: 9, name: "lower-bound sandwich", limit: Duration::from_secs(120), run: sandwich },
        Criterion { id: 10, name: "upper-bound coherence", limit: Duration::from_secs(60), run: upper_bound },
    ];
    let mut failed = 0;
    for c in &criteria {
        let start = Instant::now();
        let outcome = (c.run)();
        let elapsed = start.elapsed();
        let timing = format!("{:.2}s of {}s", elapsed.as_secs_f64(), c.limit.as_secs());
        match outcome {
            Ok(msg) if elapsed <= c.limit => {
                println!("[PASS] {:>2} {}: {msg} ({timing})", c.id, c.name)
            }
            Ok(msg) => {
                failed += 1;
                println!("[FAIL] {:>2} {}: over time budget; {msg} ({timing})", c.id, c.name)
            }
            Err(msg) => {
                failed += 1;
                println!("[FAIL] {:>2} {}: {msg} ({timing})", c.id, c.name)
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn e2s<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn mean(v: &[Complex64]) -> Complex64 {
    v.iter().sum::<Complex64>() / v.len() as f64
}

fn identities() -> Outcome {
    let n = 256;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let ones = vec![1.0; n];
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let mut draw = || -> Vec<Complex64> {
            let v: Vec<Complex64> = (0..n)
                .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            let m = mean(&v);
            v.iter().map(|x| x - m).collect()
        };
        let (b1, b2) = (draw(), draw());
        let [l1, l2] = lower_bound_pairings(&b1, &b2, &ones).map_err(e2s)?;
        let sq = |v: &[Complex64]| v.iter().map(|x| x.norm_sqr()).sum::<f64>() / n as f64;
        let cross: Vec<Complex64> = b1.iter().zip(&b2).map(|(x, y)| x * y.conj()).collect();
        let prod: Vec<Complex64> = b1.iter().zip(&b2).map(|(x, y)| x * y).collect();
        let r1 = sq(&b1) * sq(&b2) + mean(&cross).norm_sqr();
        let r2 = sq(&prod) + mean(&prod).norm_sqr();
        worst = worst.max(rel(l1.norm(), r1)).max((l2 - r2).norm() / r2);
    }
    ensure(worst <= 1e-10, || format!("worst relative error {worst:e}"))?;

    // worked instance b1 = b2 = x - 1/2 on [0, 1): exact Gauss-Legendre
    // nodes in each cell integrate the polynomial integrands exactly
    let (nodes, weights) = gauss_legendre(8);
    let h = 1.0 / n as f64;
    let mut b = Vec::new();
    let mut w = Vec::new();
    for i in 0..n {
        for (t, wt) in nodes.iter().zip(&weights) {
            let x = (i as f64 + 0.5 * (t + 1.0)) * h;
            b.push(Complex64::new(x - 0.5, 0.0));
            w.push(wt * 0.5 * h);
        }
    }
    let [l1, l2] = lower_bound_pairings(&b, &b, &w).map_err(e2s)?;
    let (e1, e2) = (rel(l1.norm(), 1.0 / 72.0), rel(l2.re, 7.0 / 360.0));
    ensure(e1 <= 1e-10 && e2 <= 1e-10 && l2.im.abs() < 1e-14, || {
        format!("worked instance: |first| = {}, second = {}", l1.norm(), l2)
    })?;
    Ok(format!(
        "100 random pairs within {worst:.1e}; worked instance 1/72, 7/360 within {:.1e}",
        e1.max(e2)
    ))
}

fn builtin_families() -> Vec<YoungFunction> {
    vec![
        YoungFunction::power(1.5).unwrap(),
        YoungFunction::power(2.0).unwrap(),
        YoungFunction::power(3.0).unwrap(),
        YoungFunction::log_bump(2.0, 1.0).unwrap(),
        YoungFunction::log_bump(1.5, 0.5).unwrap(),
        YoungFunction::loglog_bump(2.0, 0.5).unwrap(),
        YoungFunction::phi0(),
    ]
}

fn duality() -> Outcome {
    let ts: Vec<f64> = (0..1000).map(|i| 10f64.powf(-4.0 + 12.0 * i as f64 / 999.0)).collect();
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for a in builtin_families() {
        let c = a.complementary().map_err(e2s)?;
        for r in a.duality_ratios(&c, &ts).map_err(e2s)? {
            lo = lo.min(r);
            hi = hi.max(r);
        }
    }
    ensure(lo >= 1.0 - 1e-6 && hi <= 2.0 * (1.0 + 1e-6), || {
        format!("ratios span [{lo}, {hi}]")
    })?;
    Ok(format!("7 families x 1000 probes, A^-1 Abar^-1 / t in [{lo:.6}, {hi:.6}]"))
}

/// Values with heavy-tailed magnitudes and random complex phases.
fn rough(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|_| {
            let mag = (rng.gen_range(-4.0..4.0f64)).exp() * (rng.gen::<f64>() < 0.8) as u8 as f64;
            Complex64::from_polar(mag, rng.gen_range(0.0..std::f64::consts::TAU))
        })
        .collect()
}

fn random_interval(rng: &mut ChaCha8Rng, d: Domain) -> Interval {
    let n = d.n_cells();
    let start = rng.gen_range(0..n);
    let len = rng.gen_range(1..=n - start);
    Interval::new(d, start, len).unwrap()
}

fn holder() -> Outcome {
    let d = Domain::new(0.0, 1.0, 256).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let families = [YoungFunction::power(2.0).unwrap(), YoungFunction::log_bump(2.0, 1.0).unwrap()];
    let complements: Vec<YoungFunction> = families.iter().map(|a| a.complementary().unwrap()).collect();
    let mut worst = 0.0f64;
    for k in 0..1000 {
        let (a, c) = (&families[k % 2], &complements[k % 2]);
        let f = SampledFunction::from_values(d, rough(&mut rng, 256)).unwrap();
        let g = SampledFunction::from_values(d, rough(&mut rng, 256)).unwrap();
        let q = random_interval(&mut rng, d);
        let lhs = q.cells().map(|i| (f.value(i) * g.value(i)).norm()).sum::<f64>() / q.len() as f64;
        let rhs = 2.0 * luxemburg(&f, &q, a).map_err(e2s)? * luxemburg(&g, &q, c).map_err(e2s)?;
        if rhs > 0.0 {
            worst = worst.max(lhs / rhs);
        }
        ensure(lhs <= rhs * (1.0 + 1e-8), || format!("instance {k}: {lhs} > {rhs} with {a}"))?;
    }
    Ok(format!("1000 instances, largest <|fg|> / (2 <f>_A <g>_Abar) = {worst:.4}"))
}

fn luxemburg_power() -> Outcome {
    let d = Domain::new(0.0, 1.0, 256).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = 0.0f64;
    for k in 0..500 {
        let p = [1.5, 2.0, 3.0][k % 3];
        let f = SampledFunction::from_values(d, rough(&mut rng, 256)).unwrap();
        let q = random_interval(&mut rng, d);
        let lux = luxemburg(&f, &q, &YoungFunction::power(p).unwrap()).map_err(e2s)?;
        let lp = lp_average(&f, &q, p).map_err(e2s)?;
        if lp > 0.0 {
            worst = worst.max(rel(lux, lp));
        } else {
            ensure(lux == 0.0, || format!("instance {k}: zero mean but norm {lux}"))?;
        }
    }
    ensure(worst <= 1e-8, || format!("worst relative error {worst:e}"))?;
    Ok(format!("500 instances within {worst:.1e}"))
}

fn jnce1() -> Outcome {
    let pair = make_jnce1_pair();
    let d = Domain::new(-65536.0, 65536.0, 131072).unwrap();
    let s = pair.sample(d).map_err(e2s)?;
    let full = ScanSchedule::full(&d);
    let s2 = scan_condition(&s, &ConditionSpec::Sp { p: 2.0 }, &full).map_err(e2s)?;
    let t2 = scan_condition(&s, &ConditionSpec::Tp { p: 2.0 }, &full).map_err(e2s)?;
    ensure(s2.sup_lower_bound <= 4.0 && t2.sup_lower_bound <= 4.0, || {
        format!("S_2 = {}, T_2 = {}", s2.sup_lower_bound, t2.sup_lower_bound)
    })?;

    let a = YoungFunction::log_bump(2.0, 1.0).unwrap();
    let ladder = |origin: bool| -> ScanSchedule {
        let mut k = 16.0;
        let mut out = Vec::new();
        while k <= 65536.0 {
            out.push(if origin { d.interval(0.0, k) } else { d.interval(-k, k) }.unwrap());
            k *= 2.0;
        }
        ScanSchedule::Ladder(out)
    };
    let sab = scan_condition(&s, &ConditionSpec::Sab { a: a.clone(), b: a.clone() }, &ladder(false))
        .map_err(e2s)?;
    let tc = scan_condition(&s, &ConditionSpec::Tc { c: a }, &ladder(true)).map_err(e2s)?;
    ensure(sab.growth_ratio >= 1.8 && tc.growth_ratio >= 1.8, || {
        format!("growth S_AB {} on (-k, k), T_C {} on (0, k)", sab.growth_ratio, tc.growth_ratio)
    })?;

    let wd = witness_domain();
    let ws = pair.sample(wd).map_err(e2s)?;
    let op = KernelOperator::quadrature(wd);
    let mut norms = Vec::new();
    for r in [1e3, 1e4, 1e5, 1e6] {
        let f = witness_f(r).map_err(e2s)?.sample(wd).map_err(e2s)?;
        norms.push(commutator_norm_on(&op, &ws, &f, -1.0, 1.0).map_err(e2s)?);
    }
    let increasing = norms.windows(2).all(|w| w[1] > w[0]);
    let total = norms[3] / norms[0];
    ensure(increasing && total >= 1.2, || format!("witness norms {norms:?}"))?;
    Ok(format!(
        "S_2 <= {:.3}, T_2 <= {:.3}; growth S_AB {:.2}, T_C {:.2}; witness norms {:.3} -> {:.3} (x{total:.2})",
        s2.sup_lower_bound, t2.sup_lower_bound, sab.growth_ratio, tc.growth_ratio, norms[0], norms[3]
    ))
}

fn prop41() -> Outcome {
    let gp = make_prop41_pair(1.5, 3.0).map_err(e2s)?;
    // S_{3/2}, T_{3/2}: full scans on grids of [-2, 2) refined from 2^8 to 2^14 cells
    let depths: Vec<u32> = (8..=14).collect();
    let make = |depth: u32| {
        let d = Domain::new(-2.0, 2.0, 1 << depth)?;
        Ok((gp.sample(d)?, ScanSchedule::full(&d)))
    };
    let s = scan_refinements(&depths, &ConditionSpec::Sp { p: 1.5 }, make).map_err(e2s)?;
    let t = scan_refinements(&depths, &ConditionSpec::Tp { p: 1.5 }, make).map_err(e2s)?;
    let (gs, gt) = (s.tail_spread(4), t.tail_spread(4));
    ensure(gs <= 1.1 && gt <= 1.1, || format!("tail spread S {gs}, T {gt}"))?;

    // S_3 on (0, 2^-m): grid n has cell width 2^-n; report the largest value
    // over the intervals (0, 2^-m) that span at least two cells
    let spec = ConditionSpec::Sp { p: 3.0 };
    let mut values = Vec::new();
    for n in 4..=20u32 {
        let d = Domain::new(-2.0, 2.0, 1 << (n + 2)).map_err(e2s)?;
        let pair = gp.sample(d).map_err(e2s)?;
        let mut best = 0.0f64;
        for m in 0..n {
            let q = d.interval(0.0, 2f64.powi(-(m as i32))).map_err(e2s)?;
            best = best.max(spec.evaluate(&pair, &q).map_err(e2s)?);
        }
        values.push(best);
    }
    let monotone = values.windows(2).all(|w| w[1] > w[0]);
    let factor = values[values.len() - 1] / values[0];
    ensure(monotone && factor >= 2.0, || format!("S_3 values {values:?}"))?;
    Ok(format!(
        "S_3/2 spread {gs:.4}, T_3/2 spread {gt:.4} over the last 4 grids; S_3 rises x{factor:.2} from 2^-4 to 2^-20 cells"
    ))
}

fn sparse_instance(n: usize, seed: u64) -> (KernelOperator, SymbolPair, SampledFunction, itercomm::grid::DyadicInterval) {
    let (d, root) = default_root(n).unwrap();
    let pair = SymbolPair::from_samples(
        random_smooth(d, 3 * seed),
        random_smooth(d, 3 * seed + 1),
        format!("random {seed}"),
    )
    .unwrap();
    (KernelOperator::quadrature(d), pair, random_smooth(d, 3 * seed + 2), root)
}

fn sparse_construction() -> Outcome {
    let config = SparseConfig::default();
    let mut worst_spread = 1.0f64;
    let mut worst_ratio = 0.0f64;
    let mut cubes = 0;
    let mut fallbacks = 0;
    for seed in 0..50 {
        let mut ratios = Vec::new();
        for n in [1024, 2048] {
            let (op, pair, f, root) = sparse_instance(n, seed);
            let fam = build_sparse(&op, &pair, &f, &root, &config).map_err(e2s)?;
            ensure(fam.gamma >= 0.5, || format!("seed {seed}: gamma {}", fam.gamma))?;
            fam.check_sparseness().map_err(e2s)?;
            let rep = verify_domination(&op, &pair, &f, &fam).map_err(e2s)?;
            ensure(rep.max_ratio.is_finite() && rep.violation_cells.is_empty(), || {
                format!("seed {seed}, n {n}: {rep:?}")
            })?;
            if n == 1024 {
                cubes += fam.cubes.len();
                fallbacks += fam.fallbacks.len();
            }
            ratios.push(rep.max_ratio);
        }
        let spread = ratios[0].max(ratios[1]) / ratios[0].min(ratios[1]);
        worst_spread = worst_spread.max(spread);
        worst_ratio = worst_ratio.max(ratios[0]);
        ensure(spread < 2.0, || format!("seed {seed}: max_ratio {ratios:?} under refinement"))?;
    }
    Ok(format!(
        "50 seeds, {cubes} cubes, {fallbacks} fallback nodes, largest max_ratio {worst_ratio:.3}, refinement spread x{worst_spread:.3}"
    ))
}

fn hilbert() -> Outcome {
    let d = Domain::new(-8.0, 8.0, 4096).unwrap();
    let f = SampledFunction::from_midpoints(d, |x| Complex64::new((8.0 * x).cos() * (-x * x).exp(), 0.0))
        .unwrap();
    let a = KernelOperator::spectral(d).apply(&f).map_err(e2s)?;
    let b = KernelOperator::quadrature(d).apply(&f).map_err(e2s)?;
    let disc = a.sub(&b).map_err(e2s)?.l2_norm() / b.l2_norm();
    ensure(disc <= 1e-3, || format!("relative L2 discrepancy {disc:e}"))?;

    let ind = Arc::new(PiecewiseFunction::new().with(-1.0, 1.0, Piece::Const(1.0)));
    let g = ind.sample(d).map_err(e2s)?;
    let hg = KernelOperator::quadrature(d).apply(&g).map_err(e2s)?;
    let at2 = hg.at(2.0).ok_or("2 outside the window")?.re;
    let err = (at2 - 3f64.ln()).abs();
    ensure(err <= 5e-3, || format!("H(1_[-1,1])(2) = {at2}"))?;
    Ok(format!("spectral vs quadrature {disc:.2e}; H(1_[-1,1])(2) = {at2:.5} (log 3 off by {err:.1e})"))
}

/// The frozen constant for the lower-bound sandwich, fitted once.
const SANDWICH: &str = include_str!("data/sandwich_constant.json");

fn sandwich_suite() -> Vec<String> {
    let mut names = vec!["constant".to_string(), "bmo_log".to_string()];
    names.extend((0..10).map(|s| format!("smooth_random:{s}")));
    names
}

fn sandwich() -> Outcome {
    let frozen: serde_json::Value = serde_json::from_str(SANDWICH).map_err(e2s)?;
    let c = frozen["C"].as_f64().ok_or("sandwich constant missing")?;
    let n = frozen["ncells"].as_u64().ok_or("sandwich grid missing")? as usize;
    let mut worst = 0.0f64;
    for name in sandwich_suite() {
        let gp = match name.split_once(':') {
            Some((base, seed)) => by_name(base, seed.parse().unwrap()),
            None => by_name(&name, 0),
        }
        .map_err(e2s)?;
        let d = Domain::new(gp.window_hint[0], gp.window_hint[1], n).map_err(e2s)?;
        let pair = gp.sample(d).map_err(e2s)?;
        let full = ScanSchedule::full(&d);
        let s2 = scan_condition(&pair, &ConditionSpec::Sp { p: 2.0 }, &full).map_err(e2s)?;
        let t2 = scan_condition(&pair, &ConditionSpec::Tp { p: 2.0 }, &full).map_err(e2s)?;
        let lhs = s2.sup_lower_bound + t2.sup_lower_bound;
        let norm = operator_norm(&KernelOperator::quadrature(d), &pair, &NormOptions::default())
            .map_err(e2s)?
            .value;
        if std::env::var_os("ITERCOMM_SANDWICH_FIT").is_some() {
            eprintln!("{name}: S_2 + T_2 = {lhs:.6e}, norm = {norm:.6e}, ratio = {:.6}", lhs / norm);
        }
        if norm > 0.0 {
            worst = worst.max(lhs / norm);
        }
        ensure(lhs <= c * norm + 1e-12, || format!("{name}: {lhs} > {c} x {norm}"))?;
    }
    Ok(format!("12 pairs, largest (S_2 + T_2) / norm = {worst:.4} <= C = {c:.2}"))
}

fn upper_bound() -> Outcome {
    let (d, root) = default_root(1024).unwrap();
    let pair = by_name("bmo_log", 0).map_err(e2s)?.sample(d).map_err(e2s)?;
    let op = KernelOperator::quadrature(d);
    let young = YoungTriple::uniform(YoungFunction::power(2.5).unwrap());
    let ri = root.interval();
    let mut tightest = f64::INFINITY;
    for seed in 0..20 {
        // f supported on the root, so f 1_{3 root} = f. The commutator of a
        // real pair is antisymmetric, so a real f would give <C f, f> = 0;
        // f = u + i v leaves 2i <C v, u>.
        let u = random_smooth(d, 100 + seed);
        let v = random_smooth(d, 200 + seed);
        let i1 = Complex64::new(0.0, 1.0);
        let vals: Vec<Complex64> = (0..d.n_cells())
            .map(|i| if ri.contains_cell(i) { u.value(i) + i1 * v.value(i) } else { Complex64::new(0.0, 0.0) })
            .collect();
        let f = SampledFunction::from_values(d, vals).unwrap();
        let fam = build_sparse(&op, &pair, &f, &root, &SparseConfig::default()).map_err(e2s)?;
        let dom = verify_domination(&op, &pair, &f, &fam).map_err(e2s)?;
        let bound = sparse_bound_l2(&fam, &pair, &f, &f, &young).map_err(e2s)?;
        ensure(bound.warnings.is_empty(), || format!("seed {seed}: {:?}", bound.warnings))?;
        let cf = commutator_apply(&op, &pair, &f).map_err(e2s)?;
        let h = d.cell_width();
        let pairing = cf
            .values()
            .iter()
            .zip(f.values())
            .map(|(a, b)| a * b.conj())
            .sum::<Complex64>()
            .norm()
            * h;
        let total = bound.total;
        ensure(dom.violation_cells.is_empty(), || format!("seed {seed}: domination violated"))?;
        ensure(pairing <= total, || format!("seed {seed}: pairing {pairing} above bound {total}"))?;
        ensure(pairing > 1e-8 * total, || format!("seed {seed}: degenerate pairing {pairing}"))?;
        tightest = tightest.min(total / pairing);
    }
    Ok(format!("20 seeds, bound / |<C f, f>| >= {tightest:.3}"))
}
