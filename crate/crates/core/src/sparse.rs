//! Sparse domination of the iterated commutator on one root interval.
//!
//! At each node `Q` the exceptional set collects the cells where one of
//! `psi in {f, b1 f, b2 f, b1b2 f}` or its local grand maximal function
//! exceeds `alpha <|psi|>_{3Q}`. A Calderón–Zygmund decomposition of `1_E`
//! at height `1/4` gives the children; the carved set `Q \ U P` stays with
//! `Q`. The forms use oscillations and averages over `3Q` (the local
//! estimate at each node is stated on `3Q`) and are supported on `Q`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::conditions::SymbolPair;
use crate::error::{Error, Result};
use crate::grid::{Domain, DyadicInterval, Interval, SampledFunction};
use crate::singular::{commutator_apply, grand_maximal_values, KernelOperator};
use crate::young::{luxemburg_abs, YoungFunction};

/// The exponent ladder `alpha = 2^j`, `j = 0..=ALPHA_LADDER_MAX`.
pub const ALPHA_LADDER_MAX: i32 = 40;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AlphaChoice {
    /// Smallest `2^j` meeting `|E| <= |Q|/8` at each node.
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SparseConfig {
    pub alpha: AlphaChoice,
    pub max_depth: u32,
    /// Calderón–Zygmund height for `1_E`.
    pub height: f64,
}

impl Default for SparseConfig {
    fn default() -> Self {
        Self {
            alpha: AlphaChoice::Auto,
            max_depth: 64,
            height: 0.25,
        }
    }
}

impl SparseConfig {
    fn validate(&self) -> Result<()> {
        if let AlphaChoice::Fixed(a) = self.alpha {
            if !(a > 0.0 && a.is_finite()) {
                return Err(Error::param("alpha", format!("must be positive, got {a}")));
            }
        }
        if !(self.height > 0.0 && self.height < 1.0) {
            return Err(Error::param("height", format!("must lie in (0, 1), got {}", self.height)));
        }
        Ok(())
    }
}

/// A member of the family with its carved set (absolute cell indices).
#[derive(Debug, Clone)]
pub struct SparseCube {
    pub cube: DyadicInterval,
    pub carved: Vec<usize>,
    /// Recursion depth of the node (fallback halves inherit their parent's).
    pub depth: u32,
    /// The `alpha` used at this node; `None` for leaves.
    pub alpha: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct SparseFamily {
    pub root: DyadicInterval,
    pub cubes: Vec<SparseCube>,
    /// `min |E_Q| / |Q|` over the family.
    pub gamma: f64,
    /// Largest per-node `alpha`, the effective uniform constant.
    pub alpha_max: f64,
    pub recursion_depth: u32,
    /// Nodes where no `alpha` met `|E| <= |Q|/8`; they are not members and
    /// their dyadic halves were processed instead.
    pub fallbacks: Vec<DyadicInterval>,
}

#[derive(Serialize)]
struct CubeJson {
    level: u32,
    index: usize,
    carved_cells: Vec<usize>,
}

#[derive(Serialize)]
struct FallbackJson {
    level: u32,
    index: usize,
}

#[derive(Serialize)]
struct FamilyJson {
    root: [f64; 2],
    cubes: Vec<CubeJson>,
    gamma: f64,
    alpha_max: f64,
    depth: u32,
    fallbacks: Vec<FallbackJson>,
}

impl SparseFamily {
    pub fn to_json(&self) -> serde_json::Value {
        let (a, b) = self.root.bounds();
        let doc = FamilyJson {
            root: [a, b],
            cubes: self
                .cubes
                .iter()
                .map(|c| CubeJson {
                    level: c.cube.level(),
                    index: c.cube.index(),
                    carved_cells: c.carved.clone(),
                })
                .collect(),
            gamma: self.gamma,
            alpha_max: self.alpha_max,
            depth: self.recursion_depth,
            fallbacks: self
                .fallbacks
                .iter()
                .map(|p| FallbackJson {
                    level: p.level(),
                    index: p.index(),
                })
                .collect(),
        };
        serde_json::to_value(doc).expect("family serializes")
    }

    /// Checks that carved sets are pairwise disjoint, lie in their cubes and
    /// carry at least half of each cube (exact cell counts).
    pub fn check_sparseness(&self) -> Result<()> {
        let n = self.root.domain().n_cells();
        let mut owner = vec![false; n];
        for c in &self.cubes {
            let q = c.cube.interval();
            if 2 * c.carved.len() < q.len() {
                return Err(Error::Precondition(format!(
                    "cube ({}, {}) keeps {} of {} cells",
                    c.cube.level(),
                    c.cube.index(),
                    c.carved.len(),
                    q.len()
                )));
            }
            for &i in &c.carved {
                if !q.contains_cell(i) || owner[i] {
                    return Err(Error::Precondition(format!("carved cell {i} misplaced or shared")));
                }
                owner[i] = true;
            }
        }
        Ok(())
    }

    /// Total measure of the members at each recursion depth.
    pub fn mass_by_depth(&self) -> BTreeMap<u32, f64> {
        let mut out = BTreeMap::new();
        for c in &self.cubes {
            *out.entry(c.depth).or_insert(0.0) += c.cube.interval().measure();
        }
        out
    }
}

/// Per-node data: for every cell of `Q`, the smallest `alpha` at which the
/// cell leaves the exceptional set.
fn exceedance_ratios(psis: &[Vec<Complex64>; 4], q: &DyadicInterval) -> Result<Vec<f64>> {
    let qi = q.interval();
    let tq = qi.tripled()?;
    let depth = q.domain().depth();
    let mut ratio = vec![0.0f64; qi.len()];
    for psi in psis {
        let avg = tq.cells().map(|i| psi[i].norm()).sum::<f64>() / tq.len() as f64;
        if avg == 0.0 {
            // psi = 0 on 3Q contributes nothing
            continue;
        }
        let m = grand_maximal_values(psi, q, depth)?;
        for (k, i) in qi.cells().enumerate() {
            let r = psi[i].norm().max(m[k]) / avg;
            ratio[k] = ratio[k].max(r);
        }
    }
    Ok(ratio)
}

fn psi_values(pair: &SymbolPair, f: &SampledFunction) -> [Vec<Complex64>; 4] {
    let fv = f.values();
    let times = |b: &SampledFunction| -> Vec<Complex64> {
        b.values().iter().zip(fv).map(|(x, y)| x * y).collect()
    };
    [fv.to_vec(), times(&pair.b1), times(&pair.b2), times(&pair.product)]
}

fn check_inputs(op: &KernelOperator, pair: &SymbolPair, f: &SampledFunction, q: &DyadicInterval) -> Result<()> {
    let d = op.domain();
    if pair.domain() != d || f.domain() != d || q.domain() != d {
        return Err(Error::DomainMismatch(format!(
            "operator on {d}, pair on {}, f on {}, cube on {}",
            pair.domain(),
            f.domain(),
            q.domain()
        )));
    }
    q.interval().tripled()?;
    Ok(())
}

/// The exceptional set of `Q` at level `alpha`, as flags over the cells of
/// `Q`.
pub fn exceptional_set(
    op: &KernelOperator,
    pair: &SymbolPair,
    f: &SampledFunction,
    q: &DyadicInterval,
    alpha: f64,
) -> Result<Vec<bool>> {
    check_inputs(op, pair, f, q)?;
    if !(alpha > 0.0) {
        return Err(Error::param("alpha", format!("must be positive, got {alpha}")));
    }
    let ratio = exceedance_ratios(&psi_values(pair, f), q)?;
    Ok(ratio.iter().map(|&r| r > alpha).collect())
}

/// Maximal dyadic `P` strictly inside `Q` with `<1_E>_P > height`, where
/// `e` flags the cells of `Q`. The covering, measure and `P ∩ E^c`
/// properties are checked before returning.
pub fn cz_decompose(e: &[bool], q: &DyadicInterval, height: f64) -> Result<Vec<DyadicInterval>> {
    let qi = q.interval();
    if e.len() != qi.len() {
        return Err(Error::DomainMismatch(format!(
            "{} flags for a cube of {} cells",
            e.len(),
            qi.len()
        )));
    }
    let mut prefix = vec![0usize; e.len() + 1];
    for (k, &x) in e.iter().enumerate() {
        prefix[k + 1] = prefix[k] + x as usize;
    }
    let count = |p: &DyadicInterval| {
        let s = p.interval().start() - qi.start();
        prefix[s + p.n_cells()] - prefix[s]
    };
    // strict comparison in exact integers: count / len > height
    let above = |p: &DyadicInterval| count(p) as f64 > height * p.n_cells() as f64;
    if above(q) {
        return Err(Error::Precondition(format!(
            "exceptional set fills {} of {} cells, above height {height}",
            count(q),
            qi.len()
        )));
    }
    let mut out = Vec::new();
    let mut stack: Vec<DyadicInterval> = q.children().map(|c| c.to_vec()).unwrap_or_default();
    while let Some(p) = stack.pop() {
        if count(&p) == 0 {
            continue;
        }
        if above(&p) {
            out.push(p);
        } else if let Some(children) = p.children() {
            stack.extend(children);
        }
    }
    out.sort_by_key(|p| p.interval().start());

    let e_count = prefix[e.len()];
    let mut covered = 0usize;
    let mut total = 0usize;
    let mut last_end = qi.start();
    for p in &out {
        let pi = p.interval();
        if pi.start() < last_end {
            return Err(Error::Precondition("selected cubes overlap".into()));
        }
        last_end = pi.end();
        let c = count(p);
        covered += c;
        total += p.n_cells();
        // the parent average is <= height, so |P ∩ E| <= 2 height |P|
        if c >= p.n_cells() {
            return Err(Error::Precondition("selected cube has no cell outside E".into()));
        }
    }
    if covered != e_count {
        return Err(Error::Precondition("decomposition misses exceptional cells".into()));
    }
    // each P has |P| height < |P ∩ E|, so the total is below |E| / height
    if total > 0 && total as f64 * height >= e_count as f64 {
        return Err(Error::Precondition("selected cubes too large for E".into()));
    }
    Ok(out)
}

enum NodeOutcome {
    Member {
        carved: Vec<usize>,
        alpha: Option<f64>,
        children: Vec<DyadicInterval>,
    },
    Fallback([DyadicInterval; 2]),
}

fn smallest_alpha(ratio: &[f64]) -> Option<f64> {
    (0..=ALPHA_LADDER_MAX)
        .map(|j| 2f64.powi(j))
        .find(|&a| 8 * ratio.iter().filter(|&&r| r > a).count() <= ratio.len())
}

fn process_node(
    psis: &[Vec<Complex64>; 4],
    q: &DyadicInterval,
    depth: u32,
    config: &SparseConfig,
) -> Result<NodeOutcome> {
    let qi = q.interval();
    if q.is_cell() || depth >= config.max_depth {
        return Ok(NodeOutcome::Member {
            carved: qi.cells().collect(),
            alpha: None,
            children: Vec::new(),
        });
    }
    let ratio = exceedance_ratios(psis, q)?;
    let alpha = match config.alpha {
        AlphaChoice::Auto => smallest_alpha(&ratio),
        AlphaChoice::Fixed(a) => {
            (8 * ratio.iter().filter(|&&r| r > a).count() <= ratio.len()).then_some(a)
        }
    };
    let Some(alpha) = alpha else {
        return Ok(NodeOutcome::Fallback(q.children().expect("not a cell")));
    };
    let e: Vec<bool> = ratio.iter().map(|&r| r > alpha).collect();
    let children = cz_decompose(&e, q, config.height)?;
    let mut inside = vec![false; qi.len()];
    for p in &children {
        let s = p.interval().start() - qi.start();
        inside[s..s + p.n_cells()].iter_mut().for_each(|x| *x = true);
    }
    let carved = qi.cells().filter(|&i| !inside[i - qi.start()]).collect();
    Ok(NodeOutcome::Member {
        carved,
        alpha: Some(alpha),
        children,
    })
}

/// `f 1_{3 root}`.
fn localize(f: &SampledFunction, root: &DyadicInterval) -> Result<SampledFunction> {
    f.restrict(&root.interval().tripled()?)
}

/// Builds the sparse family for `(T, b, f)` on `root`, breadth first with
/// the nodes of each depth processed in parallel. `f` is replaced by
/// `f 1_{3 root}`.
pub fn build_sparse(
    op: &KernelOperator,
    pair: &SymbolPair,
    f: &SampledFunction,
    root: &DyadicInterval,
    config: &SparseConfig,
) -> Result<SparseFamily> {
    config.validate()?;
    check_inputs(op, pair, f, root)?;
    let f = localize(f, root)?;
    let psis = psi_values(pair, &f);

    let mut cubes = Vec::new();
    let mut fallbacks = Vec::new();
    let mut alpha_max = 0.0f64;
    let mut frontier = vec![(*root, 0u32)];
    let mut recursion_depth = 0;
    while !frontier.is_empty() {
        let outcomes: Vec<(DyadicInterval, u32, NodeOutcome)> = frontier
            .par_iter()
            .map(|&(q, d)| Ok((q, d, process_node(&psis, &q, d, config)?)))
            .collect::<Result<_>>()?;
        let mut next = Vec::new();
        for (q, d, outcome) in outcomes {
            recursion_depth = recursion_depth.max(d);
            match outcome {
                NodeOutcome::Member {
                    carved,
                    alpha,
                    children,
                } => {
                    if let Some(a) = alpha {
                        alpha_max = alpha_max.max(a);
                    }
                    next.extend(children.into_iter().map(|p| (p, d + 1)));
                    cubes.push(SparseCube {
                        cube: q,
                        carved,
                        depth: d,
                        alpha,
                    });
                }
                NodeOutcome::Fallback(halves) => {
                    fallbacks.push(q);
                    next.extend(halves.into_iter().map(|p| (p, d)));
                }
            }
        }
        frontier = next;
    }
    let gamma = cubes
        .iter()
        .map(|c| c.carved.len() as f64 / c.cube.n_cells() as f64)
        .fold(1.0, f64::min);
    let family = SparseFamily {
        root: *root,
        cubes,
        gamma,
        alpha_max,
        recursion_depth,
        fallbacks,
    };
    family.check_sparseness()?;
    Ok(family)
}

/// Oscillations `|b_i - <b_i>_{3Q}|` on the cells of `3Q`.
struct CubeOscillation {
    triple: Interval,
    o1: Vec<f64>,
    o2: Vec<f64>,
}

impl CubeOscillation {
    fn new(pair: &SymbolPair, q: &DyadicInterval) -> Result<Self> {
        let triple = q.interval().tripled()?;
        let osc = |b: &SampledFunction| -> Vec<f64> {
            let v = &b.values()[triple.cells()];
            let m = v.iter().sum::<Complex64>() / v.len() as f64;
            v.iter().map(|x| (x - m).norm()).collect()
        };
        Ok(Self {
            triple,
            o1: osc(&pair.b1),
            o2: osc(&pair.b2),
        })
    }

    /// Position of cell `i` inside `3Q`.
    fn local(&self, i: usize) -> usize {
        i - self.triple.start()
    }
}

fn check_family(family: &SparseFamily, pair: &SymbolPair, f: &SampledFunction) -> Result<()> {
    let d = family.root.domain();
    if pair.domain() != d || f.domain() != d {
        return Err(Error::DomainMismatch(format!(
            "family on {d}, pair on {}, f on {}",
            pair.domain(),
            f.domain()
        )));
    }
    Ok(())
}

/// The four sparse forms, cellwise:
/// `S1 = sum |o1||o2| <|f|>_{3Q} 1_Q`, `S2 = sum |o2| <|o1||f|>_{3Q} 1_Q`,
/// `S3 = sum |o1| <|o2||f|>_{3Q} 1_Q`, `S4 = sum <|o1||o2||f|>_{3Q} 1_Q`,
/// with `o_i = b_i - <b_i>_{3Q}`.
pub fn sparse_forms(
    family: &SparseFamily,
    pair: &SymbolPair,
    f: &SampledFunction,
) -> Result<[SampledFunction; 4]> {
    check_family(family, pair, f)?;
    let domain = *family.root.domain();
    let fv = f.values();
    let contributions: Vec<(Interval, [Vec<f64>; 4])> = family
        .cubes
        .par_iter()
        .map(|c| {
            let osc = CubeOscillation::new(pair, &c.cube)?;
            let t = &osc.triple;
            let absf: Vec<f64> = t.cells().map(|i| fv[i].norm()).collect();
            let n = t.len() as f64;
            let avg_f = absf.iter().sum::<f64>() / n;
            let avg_o1f = absf.iter().zip(&osc.o1).map(|(a, b)| a * b).sum::<f64>() / n;
            let avg_o2f = absf.iter().zip(&osc.o2).map(|(a, b)| a * b).sum::<f64>() / n;
            let avg_o12f = absf
                .iter()
                .zip(osc.o1.iter().zip(&osc.o2))
                .map(|(a, (x, y))| a * x * y)
                .sum::<f64>()
                / n;
            let qi = c.cube.interval();
            let mut s = [
                Vec::with_capacity(qi.len()),
                Vec::with_capacity(qi.len()),
                Vec::with_capacity(qi.len()),
                Vec::with_capacity(qi.len()),
            ];
            for i in qi.cells() {
                let k = osc.local(i);
                s[0].push(osc.o1[k] * osc.o2[k] * avg_f);
                s[1].push(osc.o2[k] * avg_o1f);
                s[2].push(osc.o1[k] * avg_o2f);
                s[3].push(avg_o12f);
            }
            Ok((qi, s))
        })
        .collect::<Result<_>>()?;
    let n = domain.n_cells();
    let mut acc = [vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    for (qi, s) in contributions {
        for (form, vals) in acc.iter_mut().zip(&s) {
            for (k, i) in qi.cells().enumerate() {
                form[i] += vals[k];
            }
        }
    }
    let [a, b, c, d] = acc;
    Ok([
        SampledFunction::from_real(domain, &a)?,
        SampledFunction::from_real(domain, &b)?,
        SampledFunction::from_real(domain, &c)?,
        SampledFunction::from_real(domain, &d)?,
    ])
}

#[derive(Debug, Clone, Serialize)]
pub struct DominationReport {
    /// `max |C_b T (f 1_{3 root})| / sum S_i` over the root cells with
    /// denominator above `1e-14`: the empirical domination constant.
    pub max_ratio: f64,
    /// Midpoint of the cell attaining `max_ratio`.
    pub argmax: Option<f64>,
    /// Root cells with vanishing denominator and non-negligible numerator.
    pub violation_cells: Vec<usize>,
    pub cells_checked: usize,
}

/// Compares the commutator with the sum of the sparse forms on the root.
pub fn verify_domination(
    op: &KernelOperator,
    pair: &SymbolPair,
    f: &SampledFunction,
    family: &SparseFamily,
) -> Result<DominationReport> {
    check_family(family, pair, f)?;
    check_inputs(op, pair, f, &family.root)?;
    let f = localize(f, &family.root)?;
    let c = commutator_apply(op, pair, &f)?;
    let forms = sparse_forms(family, pair, &f)?;
    let root = family.root.interval();
    // round-off of the four-term cancellation scales with the operands
    let scale = (1.0 + pair.b1.max_abs()) * (1.0 + pair.b2.max_abs()) * f.max_abs();
    let tol = 1e-10 * scale;
    let mut report = DominationReport {
        max_ratio: 0.0,
        argmax: None,
        violation_cells: Vec::new(),
        cells_checked: 0,
    };
    for i in root.cells() {
        let num = c.value(i).norm();
        let den: f64 = forms.iter().map(|s| s.value(i).re).sum();
        if den > 1e-14 {
            report.cells_checked += 1;
            let r = num / den;
            if r > report.max_ratio {
                report.max_ratio = r;
                report.argmax = Some(root.domain().midpoint(i));
            }
        } else if num > tol {
            report.violation_cells.push(i);
        }
    }
    Ok(report)
}

/// Young functions for the three conditions: `A` for `b1`, `B` for `b2`,
/// `C` for the product of oscillations.
#[derive(Debug, Clone)]
pub struct YoungTriple {
    pub a: YoungFunction,
    pub b: YoungFunction,
    pub c: YoungFunction,
}

impl YoungTriple {
    pub fn uniform(a: YoungFunction) -> Self {
        Self {
            a: a.clone(),
            b: a.clone(),
            c: a,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SparseBound {
    /// Majorants of `<S_i f, psi>`, `i = 1..4`.
    pub forms: [f64; 4],
    pub total: f64,
    /// Complements not classified in `B_2`.
    pub warnings: Vec<String>,
}

/// Hölder majorants of the pairings `<S_i f, psi>` over the family:
/// `S1 <= sum |Q| 2<o1 o2>_{C,Q} <psi>_{C',Q} <|f|>_{3Q}`,
/// `S2 <= sum |Q| 2<o2>_{B,Q} <psi>_{B',Q} 2<o1>_{A,3Q} <f>_{A',3Q}`,
/// `S3` likewise with the roles of `b1` and `b2` exchanged, and
/// `S4 <= sum |Q| <|psi|>_Q 2<o1 o2>_{C,3Q} <f>_{C',3Q}`, where `'` marks
/// the complementary function. Multiplying the total by the domination
/// constant bounds `|<C_b T f, psi>|`.
pub fn sparse_bound_l2(
    family: &SparseFamily,
    pair: &SymbolPair,
    f: &SampledFunction,
    psi: &SampledFunction,
    young: &YoungTriple,
) -> Result<SparseBound> {
    check_family(family, pair, f)?;
    if psi.domain() != f.domain() {
        return Err(Error::DomainMismatch("psi on another window".into()));
    }
    let mut warnings = Vec::new();
    let mut comp = Vec::new();
    for (name, y) in [("A", &young.a), ("B", &young.b), ("C", &young.c)] {
        let c = y.complementary()?;
        if !c.bp_classify(2.0)?.member {
            warnings.push(format!("complement of {name} = {y} is not in B_2"));
        }
        comp.push(c);
    }
    let (ca, cb, cc) = (&comp[0], &comp[1], &comp[2]);
    let fv = f.values();
    let pv = psi.values();
    let terms: Vec<[f64; 4]> = family
        .cubes
        .par_iter()
        .map(|c| -> Result<[f64; 4]> {
            let osc = CubeOscillation::new(pair, &c.cube)?;
            let qi = c.cube.interval();
            let t = &osc.triple;
            let on_q = |v: &[f64]| -> Vec<f64> { qi.cells().map(|i| v[osc.local(i)]).collect() };
            let o12: Vec<f64> = osc.o1.iter().zip(&osc.o2).map(|(x, y)| x * y).collect();
            let f3: Vec<f64> = t.cells().map(|i| fv[i].norm()).collect();
            let psi_q: Vec<f64> = qi.cells().map(|i| pv[i].norm()).collect();
            let mq = qi.measure();
            let avg = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
            let s1 = mq * 2.0 * luxemburg_abs(&on_q(&o12), &young.c)? * luxemburg_abs(&psi_q, cc)? * avg(&f3);
            let s2 = mq
                * 2.0
                * luxemburg_abs(&on_q(&osc.o2), &young.b)?
                * luxemburg_abs(&psi_q, cb)?
                * 2.0
                * luxemburg_abs(&osc.o1, &young.a)?
                * luxemburg_abs(&f3, ca)?;
            let s3 = mq
                * 2.0
                * luxemburg_abs(&on_q(&osc.o1), &young.a)?
                * luxemburg_abs(&psi_q, ca)?
                * 2.0
                * luxemburg_abs(&osc.o2, &young.b)?
                * luxemburg_abs(&f3, cb)?;
            let s4 = mq * avg(&psi_q) * 2.0 * luxemburg_abs(&o12, &young.c)? * luxemburg_abs(&f3, cc)?;
            Ok([s1, s2, s3, s4])
        })
        .collect::<Result<_>>()?;
    let mut forms = [0.0; 4];
    for t in terms {
        for (acc, x) in forms.iter_mut().zip(t) {
            *acc += x;
        }
    }
    Ok(SparseBound {
        forms,
        total: forms.iter().sum(),
        warnings,
    })
}

/// `sum_i <S_i f, |psi|>` computed from the forms directly.
pub fn sparse_pairing(forms: &[SampledFunction; 4], psi: &SampledFunction) -> Result<f64> {
    let h = psi.domain().cell_width();
    let mut total = 0.0;
    for s in forms {
        s.same_domain(psi)?;
        total += s
            .values()
            .iter()
            .zip(psi.values())
            .map(|(a, b)| a.re * b.norm())
            .sum::<f64>()
            * h;
    }
    Ok(total)
}

/// The default sparse window `[-2, 2)` with root `[0, 1)`.
pub fn default_root(n_cells: usize) -> Result<(Domain, DyadicInterval)> {
    let domain = Domain::new(-2.0, 2.0, n_cells)?;
    let root = DyadicInterval::new(domain, 2, 2)?;
    Ok((domain, root))
}
