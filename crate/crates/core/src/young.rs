//! Young functions and the Orlicz calculus built on them.
//!
//! Built-in families have closed forms; complementary functions are always
//! tabulated numerically (a Legendre transform on a log-spaced grid) and
//! remember which function they came from so membership in `B_p` can still
//! be decided in closed form.

use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::grid::{Interval, SampledFunction, ScanSchedule};

const E_E: f64 = 15.154_262_241_479_262; // e^e

/// A convex growth function `A` with `A(0) = 0` and `A(t)/t -> inf`.
#[derive(Debug, Clone)]
pub enum YoungFunction {
    /// `t^p`.
    Power { p: f64 },
    /// `t^p log(e+t)^(p-1+delta)`.
    LogBump { p: f64, delta: f64 },
    /// `t^p log(e+t)^(p-1) loglog(e^e+t)^(p-1+delta)`.
    LogLogBump { p: f64, delta: f64 },
    /// `t^2 log(e+t) loglog(e^e+t)^(3/2)`.
    Phi0,
    Tabulated(Arc<Table>),
}

/// A Young function given by samples `(t_i, A(t_i))`, interpolated linearly
/// in log-log coordinates and extended by the end power laws.
#[derive(Debug, Clone)]
pub struct Table {
    ln_t: Vec<f64>,
    ln_a: Vec<f64>,
    /// Set when the table is the complement of another function.
    complement_of: Option<YoungFunction>,
    label: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BpMethod {
    ClosedForm,
    NumericTail,
}

/// Membership of a Young function in `B_p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BpVerdict {
    pub p: f64,
    pub member: bool,
    pub method: BpMethod,
    /// `int_1^T A(t) t^(-p-1) dt` at the largest probed `T` (`1e12`).
    pub tail_estimate: f64,
}

impl YoungFunction {
    pub fn power(p: f64) -> Result<Self> {
        if !(p >= 1.0 && p.is_finite()) {
            return Err(Error::param("p", format!("power needs p >= 1, got {p}")));
        }
        Ok(YoungFunction::Power { p })
    }

    pub fn log_bump(p: f64, delta: f64) -> Result<Self> {
        check_bump(p, delta)?;
        Ok(YoungFunction::LogBump { p, delta })
    }

    pub fn loglog_bump(p: f64, delta: f64) -> Result<Self> {
        check_bump(p, delta)?;
        Ok(YoungFunction::LogLogBump { p, delta })
    }

    pub fn phi0() -> Self {
        YoungFunction::Phi0
    }

    /// `A(t)`.
    pub fn eval(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) || t.is_infinite() {
            return Err(Error::param("t", format!("must be finite and >= 0, got {t}")));
        }
        Ok(self.value(t))
    }

    /// `A(t)` without argument checks (`t >= 0` assumed).
    pub fn value(&self, t: f64) -> f64 {
        if t == 0.0 {
            return 0.0;
        }
        match self {
            YoungFunction::Power { p } => power(t, *p),
            YoungFunction::LogBump { p, delta } => {
                power(t, *p) * (std::f64::consts::E + t).ln().powf(p - 1.0 + delta)
            }
            YoungFunction::LogLogBump { p, delta } => loglog(t, *p, *delta),
            YoungFunction::Phi0 => loglog(t, 2.0, 0.5),
            YoungFunction::Tabulated(table) => table.value(t),
        }
    }

    /// The `t` with `A(t) = s`, by bisection on a bracket grown geometrically
    /// from `[0, 1]`.
    pub fn inverse(&self, s: f64) -> Result<f64> {
        if !(s >= 0.0) || s.is_infinite() {
            return Err(Error::param("s", format!("must be finite and >= 0, got {s}")));
        }
        if s == 0.0 {
            return Ok(0.0);
        }
        if let YoungFunction::Power { p } = self {
            return Ok(s.powf(1.0 / p));
        }
        let cap = 2f64.powi(128);
        let (mut lo, mut hi) = (0.5, 1.0);
        while self.value(hi) < s {
            lo = hi;
            hi *= 2.0;
            if hi > cap {
                return Err(Error::Overflow(s));
            }
        }
        while self.value(lo) > s {
            hi = lo;
            lo *= 0.5;
            if lo < 1.0 / cap {
                return Err(Error::Overflow(s));
            }
        }
        // A is increasing, so geometric bisection keeps A(lo) <= s <= A(hi)
        for _ in 0..200 {
            if hi - lo <= 4.0 * f64::EPSILON * hi {
                break;
            }
            let mid = (lo * hi).sqrt().clamp(lo, hi);
            let mid = if mid <= lo || mid >= hi { 0.5 * (lo + hi) } else { mid };
            if self.value(mid) < s {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let (flo, fhi) = (self.value(lo), self.value(hi));
        Ok(if s - flo <= fhi - s { lo } else { hi })
    }

    /// The complementary function `sup_s (s t - A(s))`, tabulated on 512
    /// log-spaced points of `[1e-6, 1e12]`.
    pub fn complementary(&self) -> Result<YoungFunction> {
        self.complementary_on(1e-6, 1e12, 512)
    }

    pub fn complementary_on(&self, t_min: f64, t_max: f64, points: usize) -> Result<YoungFunction> {
        match self {
            YoungFunction::Power { p } if *p <= 1.0 => {
                return Err(Error::param(
                    "A",
                    "the complement of t^p with p <= 1 is not finite",
                ))
            }
            YoungFunction::LogBump { p, delta } | YoungFunction::LogLogBump { p, delta }
                if *p == 1.0 && *delta == 0.0 =>
            {
                return Err(Error::param("A", "the complement of t is not finite"))
            }
            _ => {}
        }
        if !(t_min > 0.0 && t_max > t_min) || points < 2 {
            return Err(Error::param("grid", "need 0 < t_min < t_max and >= 2 points"));
        }
        let step = (t_max / t_min).ln() / (points - 1) as f64;
        let rows: Vec<(f64, f64)> = (0..points)
            .into_par_iter()
            .filter_map(|i| {
                let t = t_min * (step * i as f64).exp();
                let v = self.legendre(t)?;
                (v > 0.0 && v.is_finite()).then(|| (t.ln(), v.ln()))
            })
            .collect();
        if rows.len() < 2 {
            return Err(Error::Data(format!(
                "complement of {self} is not representable on [{t_min}, {t_max}]"
            )));
        }
        let (ln_t, ln_a) = rows.into_iter().unzip();
        Ok(YoungFunction::Tabulated(Arc::new(Table {
            ln_t,
            ln_a,
            complement_of: Some(self.clone()),
            label: format!("complement({self})"),
        })))
    }

    /// `sup_{s>0} (s t - A(s))` by golden-section search.
    fn legendre(&self, t: f64) -> Option<f64> {
        // A(s)/s is non-decreasing, so s t - A(s) <= 0 once A(s)/s >= t
        let slope = |s: f64| self.value(s) / s;
        let mut hi = 1.0;
        if slope(hi) < t {
            while slope(hi) < t {
                hi *= 2.0;
                if hi > 1e300 {
                    return None;
                }
            }
        } else {
            while hi > 1e-300 && slope(0.5 * hi) >= t {
                hi *= 0.5;
            }
        }
        let g = |s: f64| s * t - self.value(s);
        let r = 0.5 * (5f64.sqrt() - 1.0);
        let (mut a, mut b) = (0.0, hi);
        let mut c = b - r * (b - a);
        let mut d = a + r * (b - a);
        let (mut gc, mut gd) = (g(c), g(d));
        for _ in 0..200 {
            if b - a <= 1e-15 * b {
                break;
            }
            if gc >= gd {
                b = d;
                d = c;
                gd = gc;
                c = b - r * (b - a);
                gc = g(c);
            } else {
                a = c;
                c = d;
                gc = gd;
                d = a + r * (b - a);
                gd = g(d);
            }
        }
        Some(gc.max(gd).max(g(0.5 * (a + b))).max(0.0))
    }

    /// Closed-form `B_p` rule for built-ins and their complements, numeric
    /// tail trend for pure tables.
    pub fn bp_classify(&self, p: f64) -> Result<BpVerdict> {
        if !(p > 1.0 && p.is_finite()) {
            return Err(Error::param("p", format!("B_p needs p > 1, got {p}")));
        }
        let increments = self.tail_increments(p, 12);
        let tail_estimate = increments.iter().sum();
        let closed = match self {
            YoungFunction::Power { p: q }
            | YoungFunction::LogBump { p: q, .. }
            | YoungFunction::LogLogBump { p: q, .. } => Some(*q < p),
            YoungFunction::Phi0 => Some(2.0 < p),
            YoungFunction::Tabulated(table) => match &table.complement_of {
                Some(origin) => complement_rule(origin, p),
                None => None,
            },
        };
        Ok(match closed {
            Some(member) => BpVerdict {
                p,
                member,
                method: BpMethod::ClosedForm,
                tail_estimate,
            },
            None => {
                let n = increments.len();
                let member = increments[n - 1] < 0.9 * increments[n - 2];
                BpVerdict {
                    p,
                    member,
                    method: BpMethod::NumericTail,
                    tail_estimate,
                }
            }
        })
    }

    /// `int_{10^(k-1)}^{10^k} A(t) t^(-p-1) dt` for `k = 1..=decades`, by
    /// Gauss–Legendre in `u = ln t`.
    fn tail_increments(&self, p: f64, decades: usize) -> Vec<f64> {
        let ln10 = std::f64::consts::LN_10;
        (1..=decades)
            .map(|k| {
                let (a, b) = ((k - 1) as f64 * ln10, k as f64 * ln10);
                // split each decade so the integrand stays well resolved
                let pieces = 8;
                (0..pieces)
                    .map(|j| {
                        let lo = a + (b - a) * j as f64 / pieces as f64;
                        let hi = a + (b - a) * (j + 1) as f64 / pieces as f64;
                        let f = |u: f64| (self.value(u.exp()).ln() - p * u).exp();
                        crate::grid::gauss_mean(f, lo, hi) * (hi - lo)
                    })
                    .sum()
            })
            .collect()
    }

    /// `A^{-1}(t) Abar^{-1}(t) / t` at each `t`; lies in `[1, 2]` for a
    /// Young function and its complement.
    pub fn duality_ratios(&self, complement: &YoungFunction, ts: &[f64]) -> Result<Vec<f64>> {
        ts.iter()
            .map(|&t| Ok(self.inverse(t)? * complement.inverse(t)? / t))
            .collect()
    }

    pub fn from_table_csv(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut lines = text.lines();
        let header = lines.next().unwrap_or("").trim().replace(' ', "");
        if header != "t,A" {
            return Err(Error::Data(format!("expected header `t,A`, got `{header}`")));
        }
        let mut rows = Vec::new();
        for (i, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let parsed: Vec<f64> = line
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Data(format!("row {}: {e}", i + 2)))?;
            if parsed.len() != 2 {
                return Err(Error::Data(format!("row {}: expected 2 fields", i + 2)));
            }
            rows.push((parsed[0], parsed[1]));
        }
        let table = Table::new(&rows, format!("table:{}", path.display()))?;
        Ok(YoungFunction::Tabulated(Arc::new(table)))
    }
}

fn check_bump(p: f64, delta: f64) -> Result<()> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::param("p", format!("needs p >= 1, got {p}")));
    }
    if !(delta >= 0.0 && delta.is_finite()) {
        return Err(Error::param("delta", format!("needs delta >= 0, got {delta}")));
    }
    Ok(())
}

fn power(t: f64, p: f64) -> f64 {
    if p == 2.0 {
        t * t
    } else {
        t.powf(p)
    }
}

fn loglog(t: f64, p: f64, delta: f64) -> f64 {
    let l = (std::f64::consts::E + t).ln();
    let ll = (E_E + t).ln().ln();
    power(t, p) * l.powf(p - 1.0) * ll.powf(p - 1.0 + delta)
}

/// `B_p` membership of the complement of a built-in, via the conjugate
/// exponent `q' = q/(q-1)`.
fn complement_rule(origin: &YoungFunction, p: f64) -> Option<bool> {
    let conj = |q: f64| q / (q - 1.0);
    match origin {
        YoungFunction::Power { p: q } => Some(conj(*q) < p),
        // the complement carries a logarithmic decay exponent -1-(q'-1)delta,
        // which makes the borderline q' = p integrable exactly when delta > 0
        YoungFunction::LogBump { p: q, delta } | YoungFunction::LogLogBump { p: q, delta } => {
            let qc = conj(*q);
            Some(if *delta > 0.0 { qc <= p } else { qc < p })
        }
        YoungFunction::Phi0 => Some(2.0 <= p),
        YoungFunction::Tabulated(_) => None,
    }
}

impl Table {
    /// Builds and validates a table from `(t, A(t))` rows with `t > 0`.
    pub fn new(rows: &[(f64, f64)], label: String) -> Result<Self> {
        if rows.len() < 2 {
            return Err(Error::Data("a table needs at least two rows".into()));
        }
        for (i, &(t, a)) in rows.iter().enumerate() {
            if !(t > 0.0 && a > 0.0 && t.is_finite() && a.is_finite()) {
                return Err(Error::Data(format!("row {i}: need finite t > 0 and A > 0")));
            }
        }
        for (i, w) in rows.windows(2).enumerate() {
            if !(w[1].0 > w[0].0) {
                return Err(Error::Data(format!("t not increasing at row {}", i + 1)));
            }
            if !(w[1].1 > w[0].1) {
                return Err(Error::Data(format!("A not increasing at row {}", i + 1)));
            }
        }
        let slopes: Vec<f64> = rows
            .windows(2)
            .map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0))
            .collect();
        let first_slope = rows[0].1 / rows[0].0;
        if slopes[0] < first_slope * (1.0 - 1e-9) {
            return Err(Error::Data("A is not convex through the origin".into()));
        }
        for (i, w) in slopes.windows(2).enumerate() {
            if w[1] < w[0] * (1.0 - 1e-9) {
                return Err(Error::Data(format!("A is not convex near row {}", i + 1)));
            }
        }
        let (t0, a0) = rows[0];
        let (t1, a1) = rows[rows.len() - 1];
        if (a1 / t1) < 10.0 * (a0 / t0) {
            return Err(Error::Data(
                "A(t)/t grows by less than a factor 10 over the table".into(),
            ));
        }
        Ok(Table {
            ln_t: rows.iter().map(|r| r.0.ln()).collect(),
            ln_a: rows.iter().map(|r| r.1.ln()).collect(),
            complement_of: None,
            label,
        })
    }

    pub fn len(&self) -> usize {
        self.ln_t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ln_t.is_empty()
    }

    pub fn complement_of(&self) -> Option<&YoungFunction> {
        self.complement_of.as_ref()
    }

    /// Nodes `(t_i, A(t_i))`.
    pub fn rows(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.ln_t
            .iter()
            .zip(&self.ln_a)
            .map(|(u, v)| (u.exp(), v.exp()))
    }

    fn value(&self, t: f64) -> f64 {
        let u = t.ln();
        let n = self.ln_t.len();
        let seg = match self.ln_t.binary_search_by(|x| x.total_cmp(&u)) {
            Ok(i) => return self.ln_a[i].exp(),
            Err(0) => 0,
            Err(i) if i >= n => n - 2,
            Err(i) => i - 1,
        };
        let (u0, u1) = (self.ln_t[seg], self.ln_t[seg + 1]);
        let (v0, v1) = (self.ln_a[seg], self.ln_a[seg + 1]);
        (v0 + (v1 - v0) * (u - u0) / (u1 - u0)).exp()
    }
}

impl fmt::Display for YoungFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            YoungFunction::Power { p } => write!(f, "power:p={p}"),
            YoungFunction::LogBump { p, delta } => write!(f, "logbump:p={p},delta={delta}"),
            YoungFunction::LogLogBump { p, delta } => {
                write!(f, "loglogbump:p={p},delta={delta}")
            }
            YoungFunction::Phi0 => write!(f, "phi0"),
            YoungFunction::Tabulated(t) => write!(f, "{}", t.label),
        }
    }
}

impl FromStr for YoungFunction {
    type Err = Error;

    /// `power:p=2`, `logbump:p=2,delta=1`, `loglogbump:p=2,delta=0.5`,
    /// `phi0`, `table:<path>`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "phi0" {
            return Ok(YoungFunction::Phi0);
        }
        if let Some(path) = s.strip_prefix("table:") {
            return YoungFunction::from_table_csv(Path::new(path));
        }
        let (family, args) = s
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("Young function `{s}`: missing `family:`")))?;
        let mut p = None;
        let mut delta = None;
        for kv in args.split(',') {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("`{kv}` is not key=value")))?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|e| Error::Parse(format!("`{kv}`: {e}")))?;
            match k.trim() {
                "p" => p = Some(v),
                "delta" => delta = Some(v),
                other => return Err(Error::Parse(format!("unknown key `{other}`"))),
            }
        }
        let p = p.ok_or_else(|| Error::Parse(format!("`{s}`: missing p")))?;
        match family {
            "power" => YoungFunction::power(p),
            "logbump" | "loglogbump" => {
                let delta = delta.ok_or_else(|| Error::Parse(format!("`{s}`: missing delta")))?;
                if family == "logbump" {
                    YoungFunction::log_bump(p, delta)
                } else {
                    YoungFunction::loglog_bump(p, delta)
                }
            }
            other => Err(Error::Parse(format!("unknown Young family `{other}`"))),
        }
    }
}

impl Serialize for YoungFunction {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for YoungFunction {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Luxemburg norm `inf{l > 0 : mean A(|v|/l) <= 1}` of a list of cell
/// magnitudes (each cell equally weighted).
pub fn luxemburg_abs(abs: &[f64], a: &YoungFunction) -> Result<f64> {
    let mut max = 0.0f64;
    for &v in abs {
        if !v.is_finite() {
            return Err(Error::Data("non-finite value in Luxemburg average".into()));
        }
        max = max.max(v);
    }
    if max == 0.0 {
        return Ok(0.0);
    }
    let n = abs.len() as f64;
    let constraint = |lambda: f64| abs.iter().map(|&v| a.value(v / lambda)).sum::<f64>() / n;
    // feasible: every cell has A(|v|/hi) <= 1
    let mut hi = max / a.inverse(1.0)? * (1.0 + 1e-12);
    while constraint(hi) > 1.0 {
        hi *= 2.0;
    }
    // infeasible: the largest cell alone contributes A(max/lo)/n >= 1
    let mut lo = max / a.inverse(n)?;
    lo = lo.min(hi);
    while lo > 0.0 && constraint(lo) <= 1.0 {
        hi = lo;
        lo *= 0.5;
    }
    for _ in 0..200 {
        if hi - lo <= 1e-14 * hi {
            break;
        }
        let mid = (lo * hi).sqrt();
        let mid = if mid <= lo || mid >= hi { 0.5 * (lo + hi) } else { mid };
        if constraint(mid) <= 1.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// `<|f|>_{A,Q}` over the cells of `q`.
pub fn luxemburg(f: &SampledFunction, q: &Interval, a: &YoungFunction) -> Result<f64> {
    let values = f.values();
    let abs: Vec<f64> = q
        .cells()
        .map(|i| {
            q.check_domain(f.domain())?;
            Ok(values[i].norm())
        })
        .collect::<Result<_>>()?;
    if abs.is_empty() {
        q.check_domain(f.domain())?;
    }
    luxemburg_abs(&abs, a)
}

/// `M_A f(x) = sup_{Q ∋ x} <|f|>_{A,Q}` over the scheduled intervals.
pub fn orlicz_maximal(
    f: &SampledFunction,
    a: &YoungFunction,
    schedule: &ScanSchedule,
) -> Result<SampledFunction> {
    let domain = *f.domain();
    let intervals = schedule.intervals(&domain)?;
    let values = f.values();
    let norms: Vec<f64> = intervals
        .par_iter()
        .map(|s| {
            let abs: Vec<f64> = values[s.interval.cells()].iter().map(|v| v.norm()).collect();
            luxemburg_abs(&abs, a)
        })
        .collect::<Result<_>>()?;
    let mut out = vec![0.0f64; domain.n_cells()];
    for (s, &m) in intervals.iter().zip(&norms) {
        for o in &mut out[s.interval.cells()] {
            *o = o.max(m);
        }
    }
    SampledFunction::from_real(domain, &out)
}
