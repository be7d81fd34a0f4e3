//! Joint mean-oscillation conditions of a symbol pair and their suprema over
//! interval scans.
//!
//! For an interval `Q` with `g_i = |b_i - <b_i>_Q|`:
//!
//! - `S_p = <g1^p>^(1/p) <g2^p>^(1/p)` (decoupled),
//! - `T_p = <(g1 g2)^p>^(1/p)` (coupled),
//! - `S_{A,B} = <g1>_{A} <g2>_{B}`, `T_C = <g1 g2>_{C}` (Luxemburg versions).
//!
//! The coupled integrand is assembled cellwise from the cell averages of
//! `b1`, `b2` and the pair's own product function, so pairs whose factors are
//! singular but whose product is bounded keep a bounded coupled oscillation.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{
    check_exponent, mean, power_mean, scan_level, Domain, Interval, SampledFunction,
    ScanSchedule, ScannedInterval,
};
use crate::young::{luxemburg_abs, YoungFunction};

/// The symbols `(b1, b2)` together with their product `b1 b2`.
#[derive(Debug, Clone)]
pub struct SymbolPair {
    pub b1: SampledFunction,
    pub b2: SampledFunction,
    pub product: SampledFunction,
    pub label: String,
}

impl SymbolPair {
    /// A pair with an explicitly supplied product. When both factors are
    /// plain samples the product must be their cellwise product.
    pub fn new(
        b1: SampledFunction,
        b2: SampledFunction,
        product: SampledFunction,
        label: impl Into<String>,
    ) -> Result<Self> {
        b1.same_domain(&b2)?;
        b1.same_domain(&product)?;
        if b1.integrator().is_none() && b2.integrator().is_none() {
            for (i, ((x, y), p)) in b1
                .values()
                .iter()
                .zip(b2.values())
                .zip(product.values())
                .enumerate()
            {
                let xy = x * y;
                if (xy - p).norm() > 1e-10 * xy.norm().max(1.0) {
                    return Err(Error::Data(format!(
                        "product differs from b1*b2 in cell {i}"
                    )));
                }
            }
        }
        Ok(Self {
            b1,
            b2,
            product,
            label: label.into(),
        })
    }

    /// A pair whose product is the cellwise product of the samples.
    pub fn from_samples(
        b1: SampledFunction,
        b2: SampledFunction,
        label: impl Into<String>,
    ) -> Result<Self> {
        let product = b1.mul(&b2)?;
        Ok(Self {
            b1,
            b2,
            product,
            label: label.into(),
        })
    }

    pub fn domain(&self) -> &Domain {
        self.b1.domain()
    }

    /// The same pair with `b1 + c1` and `b2 + c2` (product adjusted
    /// accordingly).
    pub fn translated(&self, c1: Complex64, c2: Complex64) -> SymbolPair {
        let b1 = self.b1.map(|v| v + c1);
        let b2 = self.b2.map(|v| v + c2);
        let product = SampledFunction::from_values(
            *self.domain(),
            self.product
                .values()
                .iter()
                .zip(self.b1.values())
                .zip(self.b2.values())
                .map(|((&p, &x), &y)| p + c2 * x + c1 * y + c1 * c2)
                .collect(),
        )
        .expect("finite shift of finite data");
        SymbolPair {
            b1,
            b2,
            product,
            label: self.label.clone(),
        }
    }
}

/// Centered oscillations of a pair on one interval, one entry per cell.
pub struct Oscillation {
    pub g1: Vec<f64>,
    pub g2: Vec<f64>,
    /// `|(b1 - c1)(b2 - c2)|` from the product function.
    pub coupled: Vec<f64>,
}

pub fn oscillation(pair: &SymbolPair, q: &Interval) -> Result<Oscillation> {
    q.check_domain(pair.domain())?;
    let cells = q.cells();
    let b1 = &pair.b1.values()[cells.clone()];
    let b2 = &pair.b2.values()[cells.clone()];
    let pr = &pair.product.values()[cells];
    let c1 = mean(b1);
    let c2 = mean(b2);
    Ok(Oscillation {
        g1: b1.iter().map(|&v| (v - c1).norm()).collect(),
        g2: b2.iter().map(|&v| (v - c2).norm()).collect(),
        coupled: coupled_values(b1, b2, pr, c1, c2),
    })
}

/// Cellwise `|P - c2 b1 - c1 b2 + c1 c2|`, the cell mean of
/// `(b1 - c1)(b2 - c2)`.
pub(crate) fn coupled_values(
    b1: &[Complex64],
    b2: &[Complex64],
    product: &[Complex64],
    c1: Complex64,
    c2: Complex64,
) -> Vec<f64> {
    b1.iter()
        .zip(b2)
        .zip(product)
        .map(|((&x, &y), &p)| (p - c2 * x - c1 * y + c1 * c2).norm())
        .collect()
}

pub fn s_p(pair: &SymbolPair, q: &Interval, p: f64) -> Result<f64> {
    check_exponent(p)?;
    let o = oscillation(pair, q)?;
    Ok(power_mean(&o.g1, p) * power_mean(&o.g2, p))
}

pub fn t_p(pair: &SymbolPair, q: &Interval, p: f64) -> Result<f64> {
    check_exponent(p)?;
    let o = oscillation(pair, q)?;
    Ok(power_mean(&o.coupled, p))
}

pub fn s_ab(pair: &SymbolPair, q: &Interval, a: &YoungFunction, b: &YoungFunction) -> Result<f64> {
    let o = oscillation(pair, q)?;
    Ok(luxemburg_abs(&o.g1, a)? * luxemburg_abs(&o.g2, b)?)
}

pub fn t_c(pair: &SymbolPair, q: &Interval, c: &YoungFunction) -> Result<f64> {
    let o = oscillation(pair, q)?;
    luxemburg_abs(&o.coupled, c)
}

/// The two weighted double averages behind the `S_2` and `T_2` lower
/// bounds, by direct double sums over the nodes:
/// `[0] = <<(b1(x)-b1(y))(b2(x)-b2(y)) conj(b1(x)) conj(b2(y))>>` and
/// `[1] = <<(b1(x)-b1(y))(b2(x)-b2(y)) conj(b1(x) b2(x))>>`.
/// When `b1` and `b2` have mean zero these equal
/// `-(<|b1|^2><|b2|^2> + |<b1 conj(b2)>|^2)` and
/// `<|b1 b2|^2> + |<b1 b2>|^2`.
pub fn lower_bound_pairings(b1: &[Complex64], b2: &[Complex64], weights: &[f64]) -> Result<[Complex64; 2]> {
    if b1.len() != b2.len() || b1.len() != weights.len() || b1.is_empty() {
        return Err(Error::DomainMismatch(format!(
            "{} / {} values with {} weights",
            b1.len(),
            b2.len(),
            weights.len()
        )));
    }
    let total: f64 = weights.iter().sum();
    let mut first = Complex64::new(0.0, 0.0);
    let mut second = Complex64::new(0.0, 0.0);
    for x in 0..b1.len() {
        let (mut s1, mut s2) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
        for y in 0..b1.len() {
            let k = (b1[x] - b1[y]) * (b2[x] - b2[y]) * weights[y];
            s1 += k * b2[y].conj();
            s2 += k;
        }
        first += s1 * b1[x].conj() * weights[x];
        second += s2 * (b1[x] * b2[x]).conj() * weights[x];
    }
    let norm = 1.0 / (total * total);
    Ok([first * norm, second * norm])
}

/// Which condition to evaluate.
#[derive(Debug, Clone)]
pub enum ConditionSpec {
    Sp { p: f64 },
    Tp { p: f64 },
    Sab { a: YoungFunction, b: YoungFunction },
    Tc { c: YoungFunction },
}

impl ConditionSpec {
    pub fn name(&self) -> &'static str {
        match self {
            ConditionSpec::Sp { .. } => "S_p",
            ConditionSpec::Tp { .. } => "T_p",
            ConditionSpec::Sab { .. } => "S_AB",
            ConditionSpec::Tc { .. } => "T_C",
        }
    }

    pub fn params(&self) -> serde_json::Value {
        match self {
            ConditionSpec::Sp { p } | ConditionSpec::Tp { p } => serde_json::json!({ "p": p }),
            ConditionSpec::Sab { a, b } => {
                serde_json::json!({ "A": a.to_string(), "B": b.to_string() })
            }
            ConditionSpec::Tc { c } => serde_json::json!({ "C": c.to_string() }),
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            ConditionSpec::Sp { p } | ConditionSpec::Tp { p } => check_exponent(*p),
            _ => Ok(()),
        }
    }

    /// The condition's value on one interval.
    pub fn evaluate(&self, pair: &SymbolPair, q: &Interval) -> Result<f64> {
        match self {
            ConditionSpec::Sp { p } => s_p(pair, q, *p),
            ConditionSpec::Tp { p } => t_p(pair, q, *p),
            ConditionSpec::Sab { a, b } => s_ab(pair, q, a, b),
            ConditionSpec::Tc { c } => t_c(pair, q, c),
        }
    }
}

impl fmt::Display for ConditionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.name(), self.params())
    }
}

/// Names accepted on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConditionKind {
    Sp,
    Tp,
    Sab,
    Tc,
}

impl FromStr for ConditionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "s_p" | "sp" => Ok(ConditionKind::Sp),
            "t_p" | "tp" => Ok(ConditionKind::Tp),
            "s_ab" | "sab" => Ok(ConditionKind::Sab),
            "t_c" | "tc" => Ok(ConditionKind::Tc),
            other => Err(Error::Parse(format!(
                "unknown condition `{other}` (expected s_p, t_p, s_ab, t_c)"
            ))),
        }
    }
}

/// Largest value found at one scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleMax {
    pub level: u32,
    pub count: usize,
    pub max: f64,
    pub argmax: [f64; 2],
}

/// Least-squares fit `ln(max) ~ intercept + slope * level` over the scales
/// with a positive maximum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthFit {
    pub slope: f64,
    pub intercept: f64,
}

/// Per-scale maxima of a condition. Every supremum here is a lower bound
/// for the supremum over all intervals of the line.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConditionReport {
    pub condition: String,
    pub params: serde_json::Value,
    pub window: [f64; 2],
    pub per_scale: Vec<ScaleMax>,
    pub sup_lower_bound: f64,
    /// Last-scale max over first-scale max (`1` when both vanish).
    pub growth_ratio: f64,
    pub growth_fit: Option<GrowthFit>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub config: Option<serde_json::Value>,
}

impl ConditionReport {
    fn assemble(spec: &ConditionSpec, domain: &Domain, per_scale: Vec<ScaleMax>) -> Self {
        let sup_lower_bound = per_scale.iter().map(|s| s.max).fold(0.0, f64::max);
        let growth_ratio = match (per_scale.first(), per_scale.last()) {
            (Some(a), Some(b)) => ratio(b.max, a.max),
            _ => 1.0,
        };
        let pts: Vec<(f64, f64)> = per_scale
            .iter()
            .filter(|s| s.max > 0.0)
            .map(|s| (s.level as f64, s.max.ln()))
            .collect();
        ConditionReport {
            condition: spec.name().to_string(),
            params: spec.params(),
            window: [domain.left(), domain.right()],
            per_scale,
            sup_lower_bound,
            growth_ratio,
            growth_fit: fit_line(&pts).map(|(intercept, slope)| GrowthFit { slope, intercept }),
            config: None,
        }
    }

    /// Max at the last scale over the max `k` scales before it
    /// (`k = 1` compares the last two scales).
    pub fn tail_growth(&self, k: usize) -> f64 {
        let n = self.per_scale.len();
        if n == 0 {
            return 1.0;
        }
        let first = &self.per_scale[n.saturating_sub(k + 1)];
        ratio(self.per_scale[n - 1].max, first.max)
    }

    /// Largest ratio between the maxima of any two of the last `k` scales.
    pub fn tail_spread(&self, k: usize) -> f64 {
        let n = self.per_scale.len();
        let tail = &self.per_scale[n.saturating_sub(k)..];
        let hi = tail.iter().map(|s| s.max).fold(0.0, f64::max);
        let lo = tail.iter().map(|s| s.max).fold(f64::INFINITY, f64::min);
        ratio(hi, lo)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("level,count,max,argmax_left,argmax_right\n");
        for s in &self.per_scale {
            out.push_str(&format!(
                "{},{},{:e},{:e},{:e}\n",
                s.level, s.count, s.max, s.argmax[0], s.argmax[1]
            ));
        }
        out
    }
}

fn ratio(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        if a == 0.0 {
            1.0
        } else {
            f64::INFINITY
        }
    } else {
        a / b
    }
}

/// `(intercept, slope)` of the least-squares line through `pts`.
pub(crate) fn fit_line(pts: &[(f64, f64)]) -> Option<(f64, f64)> {
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    Some((my - slope * mx, slope))
}

/// Evaluates `spec` on every scheduled interval and records per-scale
/// maxima. Ties go to the smaller index, unshifted before shifted, so the
/// report does not depend on the thread count.
pub fn scan_condition(
    pair: &SymbolPair,
    spec: &ConditionSpec,
    schedule: &ScanSchedule,
) -> Result<ConditionReport> {
    spec.validate()?;
    let domain = *pair.domain();
    let mut per_scale = Vec::new();
    match schedule {
        ScanSchedule::Dyadic {
            min_level,
            max_level,
            shift,
        } => {
            if min_level > max_level || *max_level > domain.depth() {
                return Err(Error::param(
                    "levels",
                    format!(
                        "need 0 <= min <= max <= {}, got {min_level}..{max_level}",
                        domain.depth()
                    ),
                ));
            }
            for level in *min_level..=*max_level {
                let intervals: Vec<ScannedInterval> = scan_level(domain, level, *shift).collect();
                per_scale.push(scale_max(pair, spec, level, &intervals)?);
            }
        }
        ScanSchedule::Ladder(_) => {
            let intervals = schedule.intervals(&domain)?;
            let values: Vec<f64> = intervals
                .par_iter()
                .map(|s| spec.evaluate(pair, &s.interval))
                .collect::<Result<_>>()?;
            for (s, v) in intervals.iter().zip(values) {
                check_finite(v, s)?;
                per_scale.push(ScaleMax {
                    level: s.level,
                    count: 1,
                    max: v,
                    argmax: bounds(&s.interval),
                });
            }
        }
    }
    Ok(ConditionReport::assemble(spec, &domain, per_scale))
}

fn scale_max(
    pair: &SymbolPair,
    spec: &ConditionSpec,
    level: u32,
    intervals: &[ScannedInterval],
) -> Result<ScaleMax> {
    let values: Vec<f64> = intervals
        .par_iter()
        .map(|s| spec.evaluate(pair, &s.interval))
        .collect::<Result<_>>()?;
    let mut best: Option<(usize, f64)> = None;
    for (k, (s, &v)) in intervals.iter().zip(&values).enumerate() {
        check_finite(v, s)?;
        let better = match best {
            None => true,
            Some((j, m)) => {
                v > m || (v == m && (s.index, s.shifted) < (intervals[j].index, intervals[j].shifted))
            }
        };
        if better {
            best = Some((k, v));
        }
    }
    let (k, max) = best.ok_or_else(|| Error::param("levels", "empty scale"))?;
    Ok(ScaleMax {
        level,
        count: intervals.len(),
        max,
        argmax: bounds(&intervals[k].interval),
    })
}

fn check_finite(v: f64, s: &ScannedInterval) -> Result<()> {
    if !v.is_finite() {
        let (a, b) = s.interval.bounds();
        return Err(Error::Data(format!("non-finite condition value on [{a}, {b})")));
    }
    Ok(())
}

fn bounds(q: &Interval) -> [f64; 2] {
    let (a, b) = q.bounds();
    [a, b]
}

/// Runs a scan on a sequence of grids (one per depth) and reports the
/// supremum found on each grid as one scale, with `level` set to the depth.
pub fn scan_refinements<F>(depths: &[u32], spec: &ConditionSpec, mut make: F) -> Result<ConditionReport>
where
    F: FnMut(u32) -> Result<(SymbolPair, ScanSchedule)>,
{
    if depths.is_empty() {
        return Err(Error::param("depths", "empty refinement ladder"));
    }
    let mut per_scale = Vec::new();
    let mut last_domain = None;
    for &depth in depths {
        let (pair, schedule) = make(depth)?;
        let report = scan_condition(&pair, spec, &schedule)?;
        let count = report.per_scale.iter().map(|s| s.count).sum();
        let best = report
            .per_scale
            .iter()
            .fold(None::<&ScaleMax>, |acc, s| match acc {
                Some(b) if b.max >= s.max => Some(b),
                _ => Some(s),
            })
            .expect("non-empty report");
        per_scale.push(ScaleMax {
            level: depth,
            count,
            max: best.max,
            argmax: best.argmax,
        });
        last_domain = Some(*pair.domain());
    }
    Ok(ConditionReport::assemble(
        spec,
        &last_domain.expect("non-empty ladder"),
        per_scale,
    ))
}
