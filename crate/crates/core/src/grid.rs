//! Uniform windows on the line, dyadic intervals and functions stored as
//! exact cell averages.
//!
//! A [`SampledFunction`] is interpreted as the piecewise-constant function
//! whose value on each cell is the stored cell average. Every average, moment
//! and oscillation in the crate is computed from that representation, so the
//! results are exact for the discrete function and refinement-consistent for
//! functions built from an exact [`CellIntegrator`].

use std::fmt;
use std::io::{BufRead, Write};
use std::ops::Range;
use std::path::Path;
use std::sync::{Arc, OnceLock};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A bounded window `[left, right)` split into `2^J` equal cells.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    left: f64,
    right: f64,
    n_cells: usize,
}

impl Domain {
    pub fn new(left: f64, right: f64, n_cells: usize) -> Result<Self> {
        if !(left.is_finite() && right.is_finite()) || left >= right {
            return Err(Error::param(
                "window",
                format!("need finite left < right, got [{left}, {right})"),
            ));
        }
        if n_cells == 0 || !n_cells.is_power_of_two() {
            return Err(Error::param(
                "n_cells",
                format!("must be a power of two, got {n_cells}"),
            ));
        }
        Ok(Self {
            left,
            right,
            n_cells,
        })
    }

    pub fn left(&self) -> f64 {
        self.left
    }

    pub fn right(&self) -> f64 {
        self.right
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    /// `J` with `n_cells = 2^J`.
    pub fn depth(&self) -> u32 {
        self.n_cells.trailing_zeros()
    }

    pub fn width(&self) -> f64 {
        self.right - self.left
    }

    pub fn cell_width(&self) -> f64 {
        self.width() / self.n_cells as f64
    }

    /// Coordinate of the cell boundary with index `i` (`0..=n_cells`).
    pub fn boundary(&self, i: usize) -> f64 {
        if i == self.n_cells {
            self.right
        } else {
            self.left + self.width() * (i as f64 / self.n_cells as f64)
        }
    }

    pub fn cell_bounds(&self, i: usize) -> (f64, f64) {
        (self.boundary(i), self.boundary(i + 1))
    }

    pub fn midpoint(&self, i: usize) -> f64 {
        let (a, b) = self.cell_bounds(i);
        0.5 * (a + b)
    }

    /// Index of the cell containing `x`, if `x` lies in the window.
    pub fn cell_of(&self, x: f64) -> Option<usize> {
        if !(x >= self.left && x < self.right) {
            return None;
        }
        let i = ((x - self.left) / self.cell_width()).floor() as usize;
        Some(i.min(self.n_cells - 1))
    }

    pub fn whole(&self) -> Interval {
        Interval {
            domain: *self,
            start: 0,
            len: self.n_cells,
        }
    }

    /// The interval `[a, b)` snapped to cell boundaries. Endpoints must lie on
    /// boundaries up to `1e-9` of a cell width.
    pub fn interval(&self, a: f64, b: f64) -> Result<Interval> {
        let h = self.cell_width();
        let snap = |x: f64| -> Result<usize> {
            let pos = (x - self.left) / h;
            let r = pos.round();
            if (pos - r).abs() > 1e-9 || r < 0.0 || r > self.n_cells as f64 {
                return Err(Error::Window(format!(
                    "{x} is not a cell boundary of [{}, {}) with {} cells",
                    self.left, self.right, self.n_cells
                )));
            }
            Ok(r as usize)
        };
        let (s, e) = (snap(a)?, snap(b)?);
        Interval::new(*self, s, e.saturating_sub(s))
    }

    /// The same window with `2^extra` times as many cells.
    pub fn refined(&self, extra: u32) -> Result<Domain> {
        Domain::new(self.left, self.right, self.n_cells << extra)
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}) x {}", self.left, self.right, self.n_cells)
    }
}

/// A contiguous run of whole cells `[start, start + len)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    domain: Domain,
    start: usize,
    len: usize,
}

impl Interval {
    pub fn new(domain: Domain, start: usize, len: usize) -> Result<Self> {
        if len == 0 || start + len > domain.n_cells {
            return Err(Error::Window(format!(
                "cells [{start}, {}) outside {domain}",
                start + len
            )));
        }
        Ok(Self { domain, start, len })
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn end(&self) -> usize {
        self.start + self.len
    }

    pub fn cells(&self) -> Range<usize> {
        self.start..self.end()
    }

    pub fn bounds(&self) -> (f64, f64) {
        (
            self.domain.boundary(self.start),
            self.domain.boundary(self.end()),
        )
    }

    pub fn measure(&self) -> f64 {
        let (a, b) = self.bounds();
        b - a
    }

    pub fn contains_cell(&self, i: usize) -> bool {
        self.cells().contains(&i)
    }

    /// The concentric triple `3Q`. Fails when it leaves the window.
    pub fn tripled(&self) -> Result<Interval> {
        if self.start < self.len || self.end() + self.len > self.domain.n_cells {
            let (a, b) = self.bounds();
            return Err(Error::Window(format!(
                "triple of [{a}, {b}) leaves the window {}",
                self.domain
            )));
        }
        Interval::new(self.domain, self.start - self.len, 3 * self.len)
    }

    pub(crate) fn check_domain(&self, other: &Domain) -> Result<()> {
        if &self.domain != other {
            return Err(Error::DomainMismatch(format!(
                "interval on {} used with a function on {other}",
                self.domain
            )));
        }
        Ok(())
    }
}

/// A dyadic subinterval of the window, addressed by level and offset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DyadicInterval {
    domain: Domain,
    level: u32,
    index: usize,
}

impl DyadicInterval {
    pub fn new(domain: Domain, level: u32, index: usize) -> Result<Self> {
        if level > domain.depth() {
            return Err(Error::param(
                "level",
                format!("{level} exceeds grid depth {}", domain.depth()),
            ));
        }
        if index >= (1usize << level) {
            return Err(Error::param(
                "index",
                format!("{index} out of range at level {level}"),
            ));
        }
        Ok(Self {
            domain,
            level,
            index,
        })
    }

    pub fn root(domain: Domain) -> Self {
        Self {
            domain,
            level: 0,
            index: 0,
        }
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn n_cells(&self) -> usize {
        self.domain.n_cells >> self.level
    }

    pub fn interval(&self) -> Interval {
        let len = self.n_cells();
        Interval {
            domain: self.domain,
            start: self.index * len,
            len,
        }
    }

    pub fn bounds(&self) -> (f64, f64) {
        self.interval().bounds()
    }

    pub fn is_cell(&self) -> bool {
        self.level == self.domain.depth()
    }

    pub fn children(&self) -> Option<[DyadicInterval; 2]> {
        if self.is_cell() {
            return None;
        }
        let child = |i| DyadicInterval {
            domain: self.domain,
            level: self.level + 1,
            index: 2 * self.index + i,
        };
        Some([child(0), child(1)])
    }

    /// The dyadic interval at `level` containing `cell`.
    pub fn containing(domain: Domain, level: u32, cell: usize) -> Self {
        Self {
            domain,
            level,
            index: cell >> (domain.depth() - level),
        }
    }
}

/// One entry of a dyadic scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScannedInterval {
    pub level: u32,
    pub index: usize,
    /// Translated by one third of its length (snapped to cells).
    pub shifted: bool,
    pub interval: Interval,
}

/// Every dyadic interval of the levels `min_level..=max_level`, optionally
/// followed (per level) by the copies translated right by one third of their
/// length, rounded to whole cells and dropped when they leave the window.
pub fn dyadic_scan(
    domain: Domain,
    min_level: u32,
    max_level: u32,
    shift: bool,
) -> Result<impl Iterator<Item = ScannedInterval>> {
    if min_level > max_level || max_level > domain.depth() {
        return Err(Error::param(
            "levels",
            format!(
                "need 0 <= min <= max <= {}, got {min_level}..{max_level}",
                domain.depth()
            ),
        ));
    }
    Ok((min_level..=max_level).flat_map(move |level| scan_level(domain, level, shift)))
}

pub(crate) fn scan_level(
    domain: Domain,
    level: u32,
    shift: bool,
) -> impl Iterator<Item = ScannedInterval> {
    let len = domain.n_cells >> level;
    let count = 1usize << level;
    let plain = (0..count).map(move |index| ScannedInterval {
        level,
        index,
        shifted: false,
        interval: Interval {
            domain,
            start: index * len,
            len,
        },
    });
    let offset = ((len as f64) / 3.0).round() as usize;
    let shifted = (0..count)
        .filter(move |_| shift && offset > 0)
        .filter(move |index| index * len + offset + len <= domain.n_cells)
        .map(move |index| ScannedInterval {
            level,
            index,
            shifted: true,
            interval: Interval {
                domain,
                start: index * len + offset,
                len,
            },
        });
    plain.chain(shifted)
}

/// Which intervals a supremum is taken over.
#[derive(Debug, Clone, PartialEq)]
pub enum ScanSchedule {
    /// All dyadic intervals of the given levels, optionally with their
    /// one-third translates.
    Dyadic {
        min_level: u32,
        max_level: u32,
        shift: bool,
    },
    /// An explicit list of intervals; entry `k` is reported as scale `k`.
    Ladder(Vec<Interval>),
}

impl ScanSchedule {
    /// Levels `0..=J` with shifts: the default "all intervals" surrogate.
    pub fn full(domain: &Domain) -> Self {
        ScanSchedule::Dyadic {
            min_level: 0,
            max_level: domain.depth(),
            shift: true,
        }
    }

    /// Every scheduled interval, in reporting order (scale, then index,
    /// unshifted before shifted).
    pub fn intervals(&self, domain: &Domain) -> Result<Vec<ScannedInterval>> {
        match self {
            ScanSchedule::Dyadic {
                min_level,
                max_level,
                shift,
            } => Ok(dyadic_scan(*domain, *min_level, *max_level, *shift)?.collect()),
            ScanSchedule::Ladder(list) => {
                if list.is_empty() {
                    return Err(Error::param("ladder", "empty interval list"));
                }
                list.iter()
                    .enumerate()
                    .map(|(k, q)| {
                        q.check_domain(domain)?;
                        Ok(ScannedInterval {
                            level: k as u32,
                            index: 0,
                            shifted: false,
                            interval: *q,
                        })
                    })
                    .collect()
            }
        }
    }
}

/// Exact integration of a function over subintervals of the line.
///
/// Implementors supply closed-form (or quadrature-exact) cell means; the
/// optional `abs_pow_mean` supplies means of `|f|^p`.
pub trait CellIntegrator: Send + Sync {
    fn mean(&self, a: f64, b: f64) -> Complex64;

    fn abs_pow_mean(&self, _a: f64, _b: f64, _p: f64) -> Option<f64> {
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Sampled,
    ExactCellAverage,
}

/// Complex cell averages on a [`Domain`].
#[derive(Clone)]
pub struct SampledFunction {
    domain: Domain,
    values: Vec<Complex64>,
    source: Option<Arc<dyn CellIntegrator>>,
}

impl fmt::Debug for SampledFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SampledFunction")
            .field("domain", &self.domain)
            .field("provenance", &self.provenance())
            .field("n", &self.values.len())
            .finish()
    }
}

impl SampledFunction {
    pub fn from_values(domain: Domain, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != domain.n_cells {
            return Err(Error::Data(format!(
                "{} values for {} cells",
                values.len(),
                domain.n_cells
            )));
        }
        if let Some(i) = values.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::Data(format!("non-finite value in cell {i}")));
        }
        Ok(Self {
            domain,
            values,
            source: None,
        })
    }

    pub fn from_real(domain: Domain, values: &[f64]) -> Result<Self> {
        Self::from_values(domain, values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    pub fn zeros(domain: Domain) -> Self {
        Self {
            domain,
            values: vec![Complex64::new(0.0, 0.0); domain.n_cells],
            source: None,
        }
    }

    pub fn constant(domain: Domain, c: Complex64) -> Self {
        Self {
            domain,
            values: vec![c; domain.n_cells],
            source: None,
        }
    }

    /// Point samples at cell midpoints (provenance `sampled`).
    pub fn from_midpoints(domain: Domain, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        let values = (0..domain.n_cells).map(|i| f(domain.midpoint(i))).collect();
        Self::from_values(domain, values)
    }

    /// Exact cell averages from an integrator.
    pub fn from_integrator(domain: Domain, source: Arc<dyn CellIntegrator>) -> Result<Self> {
        let values = (0..domain.n_cells)
            .into_par_iter()
            .map(|i| {
                let (a, b) = domain.cell_bounds(i);
                source.mean(a, b)
            })
            .collect();
        let mut out = Self::from_values(domain, values)?;
        out.source = Some(source);
        Ok(out)
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn provenance(&self) -> Provenance {
        if self.source.is_some() {
            Provenance::ExactCellAverage
        } else {
            Provenance::Sampled
        }
    }

    pub fn integrator(&self) -> Option<&Arc<dyn CellIntegrator>> {
        self.source.as_ref()
    }

    pub fn value(&self, i: usize) -> Complex64 {
        self.values[i]
    }

    /// Value of the cell containing `x`.
    pub fn at(&self, x: f64) -> Option<Complex64> {
        self.domain.cell_of(x).map(|i| self.values[i])
    }

    pub(crate) fn same_domain(&self, other: &SampledFunction) -> Result<()> {
        if self.domain != other.domain {
            return Err(Error::DomainMismatch(format!(
                "{} vs {}",
                self.domain, other.domain
            )));
        }
        Ok(())
    }

    /// Cellwise map; the result is `sampled`.
    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> SampledFunction {
        SampledFunction {
            domain: self.domain,
            values: self.values.iter().map(|&v| f(v)).collect(),
            source: None,
        }
    }

    /// Cellwise product; the result is `sampled`.
    pub fn mul(&self, other: &SampledFunction) -> Result<SampledFunction> {
        self.same_domain(other)?;
        Ok(self.zip_with(other, |a, b| a * b))
    }

    pub fn add(&self, other: &SampledFunction) -> Result<SampledFunction> {
        self.same_domain(other)?;
        Ok(self.zip_with(other, |a, b| a + b))
    }

    pub fn sub(&self, other: &SampledFunction) -> Result<SampledFunction> {
        self.same_domain(other)?;
        Ok(self.zip_with(other, |a, b| a - b))
    }

    pub fn scale(&self, c: Complex64) -> SampledFunction {
        self.map(|v| v * c)
    }

    pub fn conj(&self) -> SampledFunction {
        self.map(|v| v.conj())
    }

    fn zip_with(
        &self,
        other: &SampledFunction,
        f: impl Fn(Complex64, Complex64) -> Complex64,
    ) -> SampledFunction {
        SampledFunction {
            domain: self.domain,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
            source: None,
        }
    }

    /// `f * 1_Q`.
    pub fn restrict(&self, q: &Interval) -> Result<SampledFunction> {
        q.check_domain(&self.domain)?;
        let mut values = vec![Complex64::new(0.0, 0.0); self.domain.n_cells];
        values[q.cells()].copy_from_slice(&self.values[q.cells()]);
        Ok(SampledFunction {
            domain: self.domain,
            values,
            source: None,
        })
    }

    /// `L^2` norm of the piecewise-constant function over the window.
    pub fn l2_norm(&self) -> f64 {
        (self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.domain.cell_width()).sqrt()
    }

    /// `L^2` norm restricted to the cells of `q`.
    pub fn l2_norm_on(&self, q: &Interval) -> Result<f64> {
        q.check_domain(&self.domain)?;
        Ok((self.values[q.cells()].iter().map(|v| v.norm_sqr()).sum::<f64>()
            * self.domain.cell_width())
        .sqrt())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Reads the `x,re,im` CSV format (one row per cell midpoint).
    pub fn read_csv(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::parse_csv(std::io::BufReader::new(file))
    }

    pub fn parse_csv(reader: impl BufRead) -> Result<Self> {
        let mut lines = reader.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Data("empty CSV".into()))??;
        if header.trim().replace(' ', "") != "x,re,im" {
            return Err(Error::Data(format!(
                "expected header `x,re,im`, got `{}`",
                header.trim()
            )));
        }
        let mut xs = Vec::new();
        let mut values = Vec::new();
        for (lineno, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 3 {
                return Err(Error::Data(format!(
                    "row {}: expected 3 fields, got {}",
                    lineno + 2,
                    fields.len()
                )));
            }
            let num = |s: &str| -> Result<f64> {
                s.parse::<f64>()
                    .map_err(|e| Error::Data(format!("row {}: `{s}`: {e}", lineno + 2)))
            };
            xs.push(num(fields[0])?);
            values.push(Complex64::new(num(fields[1])?, num(fields[2])?));
        }
        if xs.len() < 2 {
            return Err(Error::Data("need at least two rows".into()));
        }
        let h = (xs[xs.len() - 1] - xs[0]) / (xs.len() - 1) as f64;
        if !(h > 0.0) {
            return Err(Error::Data("midpoints must increase".into()));
        }
        for (i, w) in xs.windows(2).enumerate() {
            if ((w[1] - w[0]) - h).abs() > 1e-9 * h {
                return Err(Error::Data(format!(
                    "non-uniform spacing between rows {} and {}",
                    i + 2,
                    i + 3
                )));
            }
        }
        let domain = Domain::new(xs[0] - 0.5 * h, xs[xs.len() - 1] + 0.5 * h, xs.len())
            .map_err(|e| Error::Data(e.to_string()))?;
        Self::from_values(domain, values)
    }

    pub fn write_csv(&self, out: &mut impl Write) -> Result<()> {
        writeln!(out, "x,re,im")?;
        for (i, v) in self.values.iter().enumerate() {
            writeln!(out, "{:e},{:e},{:e}", self.domain.midpoint(i), v.re, v.im)?;
        }
        Ok(())
    }
}

/// Mean of the stored cell averages over `q`.
pub fn average(f: &SampledFunction, q: &Interval) -> Result<Complex64> {
    q.check_domain(&f.domain)?;
    Ok(mean(&f.values[q.cells()]))
}

/// `(<|f|^p>_Q)^{1/p}`. Exact-average functions use the integrator's
/// `|f|^p` cell means when it has them.
pub fn lp_average(f: &SampledFunction, q: &Interval, p: f64) -> Result<f64> {
    check_exponent(p)?;
    q.check_domain(&f.domain)?;
    if let Some(src) = &f.source {
        let mut acc = 0.0;
        let mut exact = true;
        for i in q.cells() {
            let (a, b) = f.domain.cell_bounds(i);
            match src.abs_pow_mean(a, b, p) {
                Some(m) => acc += m,
                None => {
                    exact = false;
                    break;
                }
            }
        }
        if exact {
            return Ok((acc / q.len() as f64).powf(1.0 / p));
        }
    }
    let abs: Vec<f64> = f.values[q.cells()].iter().map(|v| v.norm()).collect();
    Ok(power_mean(&abs, p))
}

pub(crate) fn check_exponent(p: f64) -> Result<()> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::param("p", format!("must be a finite real >= 1, got {p}")));
    }
    Ok(())
}

pub(crate) fn mean(values: &[Complex64]) -> Complex64 {
    let s: Complex64 = values.iter().sum();
    s / values.len() as f64
}

/// `(mean |v|^p)^{1/p}` for non-negative `v`.
pub(crate) fn power_mean(abs: &[f64], p: f64) -> f64 {
    let n = abs.len() as f64;
    if p == 1.0 {
        abs.iter().sum::<f64>() / n
    } else if p == 2.0 {
        (abs.iter().map(|v| v * v).sum::<f64>() / n).sqrt()
    } else {
        let max = abs.iter().cloned().fold(0.0, f64::max);
        if max == 0.0 {
            return 0.0;
        }
        // scaled by the max so large moments do not overflow
        let s: f64 = abs.iter().map(|v| (v / max).powf(p)).sum();
        max * (s / n).powf(1.0 / p)
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; order];
    let mut weights = vec![0.0; order];
    let n = order as f64;
    for i in 0..order.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=order {
                let k = k as f64;
                let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[order - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[order - 1 - i] = w;
    }
    (nodes, weights)
}

fn gl8() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(8))
}

/// Mean of a smooth function over `[a, b]` by 8-point Gauss–Legendre.
pub fn gauss_mean(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let (nodes, weights) = gl8();
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    0.5 * nodes
        .iter()
        .zip(weights)
        .map(|(x, w)| w * f(mid + half * x))
        .sum::<f64>()
}
