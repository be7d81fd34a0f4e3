//! Discrete Hilbert transforms with kernel `1/(x - y)` (no `1/pi`), the
//! iterated commutator `[b2, [b1, H]]`, its norm estimate and the maximal
//! truncations used by sparse domination.
//!
//! The quadrature kind at the default `eps = h` uses the odd-offset rule: the
//! offset `m = i - j` gets weight `2/m` for odd `m` and zero otherwise. This is
//! the midpoint rule with step `2h` centred away from the singularity, so the
//! principal value needs no self-cell term and smooth data is reproduced to
//! spectral accuracy. Truncations with `eps = k h`, `k >= 2`, keep offsets
//! `|m| >= k` with the exact cell integral `sgn(m) ln((|m| + 1/2)/(|m| - 1/2))`
//! of `1/(x_i - y)`. Both weight sets are exactly antisymmetric.

use std::ops::Range;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::conditions::SymbolPair;
use crate::error::{Error, Result};
use crate::grid::{Domain, DyadicInterval, SampledFunction};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelKind {
    /// Fourier multiplier `-i pi sgn(k)` on the periodized window.
    HilbertSpectral,
    /// Principal-value quadrature on the window (zero extension).
    HilbertQuadrature,
}

/// A discretized Hilbert transform on one window.
#[derive(Clone)]
pub struct KernelOperator {
    kind: KernelKind,
    domain: Domain,
    epsilon: f64,
    conv: Arc<OnceLock<Convolver>>,
}

impl std::fmt::Debug for KernelOperator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("KernelOperator")
            .field("kind", &self.kind)
            .field("domain", &self.domain)
            .field("epsilon", &self.epsilon)
            .finish()
    }
}

fn planner() -> &'static Mutex<FftPlanner<f64>> {
    static PLANNER: OnceLock<Mutex<FftPlanner<f64>>> = OnceLock::new();
    PLANNER.get_or_init(|| Mutex::new(FftPlanner::new()))
}

fn plans(size: usize) -> (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>) {
    let mut p = planner().lock().expect("fft planner poisoned");
    (p.plan_fft_forward(size), p.plan_fft_inverse(size))
}

/// Principal-value weight for the cell offset `m` (odd-offset rule).
pub fn kernel_weight(m: i64) -> f64 {
    if m % 2 == 0 {
        0.0
    } else {
        2.0 / m as f64
    }
}

/// Cell-integral weight for the offset `m`, used by truncations `eps >= 2h`.
pub fn cell_weight(m: i64) -> f64 {
    if m == 0 {
        return 0.0;
    }
    let a = m.unsigned_abs() as f64;
    let w = ((a + 0.5) / (a - 0.5)).ln();
    if m > 0 {
        w
    } else {
        -w
    }
}

/// Weight of offset `m` in the truncation keeping `|m| >= min_offset`.
fn offset_weight(m: i64, min_offset: usize) -> f64 {
    if min_offset <= 1 {
        kernel_weight(m)
    } else {
        cell_weight(m)
    }
}

/// Linear convolution with a fixed antisymmetric kernel via zero-padded FFT.
#[derive(Clone)]
struct Convolver {
    n: usize,
    size: usize,
    kernel_hat: Vec<Complex64>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl Convolver {
    /// Offsets with `|m| < min_offset` get weight zero.
    fn new(n: usize, min_offset: usize) -> Self {
        let size = (2 * n).next_power_of_two().max(2);
        let (fwd, inv) = plans(size);
        let mut kernel = vec![ZERO; size];
        for m in 1..n {
            if m < min_offset {
                continue;
            }
            let w = offset_weight(m as i64, min_offset);
            kernel[m] = Complex64::new(w, 0.0);
            kernel[size - m] = Complex64::new(-w, 0.0);
        }
        fwd.process(&mut kernel);
        Self {
            n,
            size,
            kernel_hat: kernel,
            fwd,
            inv,
        }
    }

    fn apply(&self, f: &[Complex64]) -> Vec<Complex64> {
        let mut buf = vec![ZERO; self.size];
        buf[..self.n].copy_from_slice(f);
        self.fwd.process(&mut buf);
        for (b, k) in buf.iter_mut().zip(&self.kernel_hat) {
            *b *= k;
        }
        self.inv.process(&mut buf);
        let scale = 1.0 / self.size as f64;
        buf.truncate(self.n);
        for b in &mut buf {
            *b *= scale;
        }
        buf
    }
}

impl KernelOperator {
    /// Quadrature kind with `eps` equal to one cell width.
    pub fn quadrature(domain: Domain) -> Self {
        Self {
            kind: KernelKind::HilbertQuadrature,
            domain,
            epsilon: domain.cell_width(),
            conv: Arc::new(OnceLock::new()),
        }
    }

    pub fn quadrature_with_epsilon(domain: Domain, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::param("epsilon", format!("must be > 0, got {epsilon}")));
        }
        Ok(Self {
            epsilon,
            ..Self::quadrature(domain)
        })
    }

    pub fn spectral(domain: Domain) -> Self {
        Self {
            kind: KernelKind::HilbertSpectral,
            ..Self::quadrature(domain)
        }
    }

    pub fn new(kind: KernelKind, domain: Domain) -> Self {
        match kind {
            KernelKind::HilbertQuadrature => Self::quadrature(domain),
            KernelKind::HilbertSpectral => Self::spectral(domain),
        }
    }

    pub fn kind(&self) -> KernelKind {
        self.kind
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Smallest offset kept by the truncation `|m| h >= eps`.
    fn min_offset(&self) -> usize {
        let r = self.epsilon / self.domain.cell_width();
        let c = r.ceil();
        // an eps within rounding of a multiple of h keeps that multiple
        let m = if (r - r.round()).abs() < 1e-9 { r.round() } else { c };
        (m.max(1.0)) as usize
    }

    fn convolver(&self) -> &Convolver {
        self.conv
            .get_or_init(|| Convolver::new(self.domain.n_cells(), self.min_offset()))
    }

    fn check(&self, f: &SampledFunction) -> Result<()> {
        if f.domain() != &self.domain {
            return Err(Error::DomainMismatch(format!(
                "operator on {} applied to a function on {}",
                self.domain,
                f.domain()
            )));
        }
        Ok(())
    }

    /// `T f` on every cell.
    pub fn apply(&self, f: &SampledFunction) -> Result<SampledFunction> {
        self.check(f)?;
        SampledFunction::from_values(self.domain, self.apply_values(f.values()))
    }

    pub(crate) fn apply_values(&self, f: &[Complex64]) -> Vec<Complex64> {
        match self.kind {
            KernelKind::HilbertQuadrature => self.convolver().apply(f),
            KernelKind::HilbertSpectral => spectral_apply(f),
        }
    }

    /// `T f` at the listed cells only, by direct summation (quadrature
    /// kind; the spectral kind transforms the whole window).
    pub fn apply_at(&self, f: &SampledFunction, cells: &[usize]) -> Result<Vec<Complex64>> {
        self.check(f)?;
        if let Some(&bad) = cells.iter().find(|&&c| c >= self.domain.n_cells()) {
            return Err(Error::Window(format!("cell {bad} outside {}", self.domain)));
        }
        Ok(self.apply_values_at(f.values(), cells))
    }

    fn apply_values_at(&self, f: &[Complex64], cells: &[usize]) -> Vec<Complex64> {
        match self.kind {
            KernelKind::HilbertSpectral => {
                let full = spectral_apply(f);
                cells.iter().map(|&c| full[c]).collect()
            }
            KernelKind::HilbertQuadrature => {
                let min = self.min_offset() as i64;
                cells
                    .par_iter()
                    .map(|&i| {
                        let mut acc = ZERO;
                        for (j, &v) in f.iter().enumerate() {
                            let m = i as i64 - j as i64;
                            if m.abs() >= min && v != ZERO {
                                acc += v * offset_weight(m, min as usize);
                            }
                        }
                        acc
                    })
                    .collect()
            }
        }
    }
}

fn spectral_apply(f: &[Complex64]) -> Vec<Complex64> {
    let n = f.len();
    let (fwd, inv) = plans(n);
    let mut buf = f.to_vec();
    fwd.process(&mut buf);
    let pi = std::f64::consts::PI;
    for (k, b) in buf.iter_mut().enumerate() {
        // positive frequencies 1..n/2, negative above; DC and Nyquist dropped
        let m = if k == 0 || 2 * k == n {
            ZERO
        } else if 2 * k < n {
            Complex64::new(0.0, -pi)
        } else {
            Complex64::new(0.0, pi)
        };
        *b *= m;
    }
    inv.process(&mut buf);
    let scale = 1.0 / n as f64;
    for b in &mut buf {
        *b *= scale;
    }
    buf
}

fn check_pair(op: &KernelOperator, pair: &SymbolPair, f: &SampledFunction) -> Result<()> {
    op.check(f)?;
    if pair.domain() != &op.domain {
        return Err(Error::DomainMismatch(format!(
            "pair on {} with operator on {}",
            pair.domain(),
            op.domain
        )));
    }
    Ok(())
}

fn times(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    a.iter().zip(b).map(|(x, y)| x * y).collect()
}

/// Commutator terms `(b1 b2, b1, b2)` as plain slices.
struct Symbols<'a> {
    b1: &'a [Complex64],
    b2: &'a [Complex64],
    product: &'a [Complex64],
}

impl<'a> Symbols<'a> {
    fn of(pair: &'a SymbolPair) -> Self {
        Self {
            b1: pair.b1.values(),
            b2: pair.b2.values(),
            product: pair.product.values(),
        }
    }
}

fn commutator_values(op: &KernelOperator, s: &Symbols<'_>, f: &[Complex64]) -> Vec<Complex64> {
    let tf = op.apply_values(f);
    let tb1f = op.apply_values(&times(s.b1, f));
    let tb2f = op.apply_values(&times(s.b2, f));
    let tpf = op.apply_values(&times(s.product, f));
    (0..f.len())
        .map(|i| s.product[i] * tf[i] - s.b2[i] * tb1f[i] - s.b1[i] * tb2f[i] + tpf[i])
        .collect()
}

/// `[b2, [b1, T]] f = b1b2 Tf - b2 T(b1 f) - b1 T(b2 f) + T(b1b2 f)`, with
/// `b1b2` taken from the pair's product function.
pub fn commutator_apply(
    op: &KernelOperator,
    pair: &SymbolPair,
    f: &SampledFunction,
) -> Result<SampledFunction> {
    check_pair(op, pair, f)?;
    SampledFunction::from_values(op.domain, commutator_values(op, &Symbols::of(pair), f.values()))
}

/// The same commutator evaluated as nested brackets `b2 g - [b1, T](b2 f)`
/// with `g = [b1, T] f`, using cellwise products of the samples.
pub fn commutator_apply_nested(
    op: &KernelOperator,
    pair: &SymbolPair,
    f: &SampledFunction,
) -> Result<SampledFunction> {
    check_pair(op, pair, f)?;
    let b1 = pair.b1.values();
    let b2 = pair.b2.values();
    let inner = |g: &[Complex64]| -> Vec<Complex64> {
        let tg = op.apply_values(g);
        let tb1g = op.apply_values(&times(b1, g));
        (0..g.len()).map(|i| b1[i] * tg[i] - tb1g[i]).collect()
    };
    let g = inner(f.values());
    let h = inner(&times(b2, f.values()));
    let out = (0..g.len()).map(|i| b2[i] * g[i] - h[i]).collect();
    SampledFunction::from_values(op.domain, out)
}

/// The commutator at the listed cells only (direct sums).
pub fn commutator_apply_at(
    op: &KernelOperator,
    pair: &SymbolPair,
    f: &SampledFunction,
    cells: &[usize],
) -> Result<Vec<Complex64>> {
    check_pair(op, pair, f)?;
    let s = Symbols::of(pair);
    let fv = f.values();
    let tf = op.apply_values_at(fv, cells);
    let tb1f = op.apply_values_at(&times(s.b1, fv), cells);
    let tb2f = op.apply_values_at(&times(s.b2, fv), cells);
    let tpf = op.apply_values_at(&times(s.product, fv), cells);
    Ok(cells
        .iter()
        .enumerate()
        .map(|(k, &i)| s.product[i] * tf[k] - s.b2[i] * tb1f[k] - s.b1[i] * tb2f[k] + tpf[k])
        .collect())
}

/// Largest singular value estimate of a discretized commutator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormEstimate {
    pub value: f64,
    pub iterations: usize,
    pub residual: f64,
    pub grid_size: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormOptions {
    /// Relative change of the estimate at which iteration stops.
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for NormOptions {
    fn default() -> Self {
        Self {
            tol: 1e-7,
            max_iter: 3000,
            seed: 0,
        }
    }
}

/// Power iteration on `C* C` for `C = [b2, [b1, T]]` (matrix free; `C* =
/// -C` with conjugated symbols since `T* = -T`). Every iterate `||C v||`
/// with `||v|| = 1` is a lower bound for the discrete norm.
pub fn operator_norm(
    op: &KernelOperator,
    pair: &SymbolPair,
    opts: &NormOptions,
) -> Result<NormEstimate> {
    if pair.domain() != &op.domain {
        return Err(Error::DomainMismatch(format!(
            "pair on {} with operator on {}",
            pair.domain(),
            op.domain
        )));
    }
    if !(opts.tol > 0.0) || opts.max_iter == 0 {
        return Err(Error::param("tol", "need tol > 0 and max_iter >= 1"));
    }
    let n = op.domain.n_cells();
    let s = Symbols::of(pair);
    let conj = |v: &[Complex64]| -> Vec<Complex64> { v.iter().map(|z| z.conj()).collect() };
    let (c1, c2, cp) = (conj(s.b1), conj(s.b2), conj(s.product));
    let adj = Symbols {
        b1: &c1,
        b2: &c2,
        product: &cp,
    };
    let scale = [s.b1, s.b2, s.product]
        .iter()
        .flat_map(|v| v.iter().map(|z| z.norm()))
        .fold(0.0, f64::max);

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut v: Vec<Complex64> = (0..n)
        .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
        .collect();
    normalize(&mut v);
    let mut sigma = 0.0;
    let mut residual = f64::INFINITY;
    for it in 1..=opts.max_iter {
        let cv = commutator_values(op, &s, &v);
        let next = l2(&cv);
        if next <= 1e-13 * (1.0 + scale * scale) {
            return Ok(NormEstimate {
                value: 0.0,
                iterations: it,
                residual: 0.0,
                grid_size: n,
            });
        }
        residual = ((next - sigma) / next).abs();
        sigma = next;
        if residual <= opts.tol {
            return Ok(NormEstimate {
                value: sigma,
                iterations: it,
                residual,
                grid_size: n,
            });
        }
        let mut w = commutator_values(op, &adj, &cv);
        for z in &mut w {
            *z = -*z;
        }
        if l2(&w) == 0.0 {
            break;
        }
        normalize(&mut w);
        v = w;
    }
    Err(Error::NonConvergence {
        iterations: opts.max_iter,
        last_value: sigma,
        residual,
    })
}

fn l2(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn normalize(v: &mut [Complex64]) {
    let n = l2(v);
    if n > 0.0 {
        for z in v {
            *z /= n;
        }
    }
}

/// `T_* f = sup_eps |T_eps f|` over `eps = 2^k h`, `k = 0..=J`, using the
/// quadrature kernel.
pub fn truncated_maximal(op: &KernelOperator, f: &SampledFunction) -> Result<SampledFunction> {
    op.check(f)?;
    let n = op.domain.n_cells();
    let levels: Vec<usize> = (0..=op.domain.depth()).map(|k| 1usize << k).collect();
    let transforms: Vec<Vec<Complex64>> = levels
        .par_iter()
        .map(|&m| Convolver::new(n, m).apply(f.values()))
        .collect();
    let out: Vec<f64> = (0..n)
        .map(|i| transforms.iter().map(|t| t[i].norm()).fold(0.0, f64::max))
        .collect();
    SampledFunction::from_real(op.domain, &out)
}

/// `sum_{j in src} w(t - j) f_j` for `t in tgt` with the quadrature kernel
/// (self cell excluded).
pub(crate) fn local_transform(
    f: &[Complex64],
    src: Range<usize>,
    tgt: Range<usize>,
) -> Vec<Complex64> {
    if src.is_empty() {
        return vec![ZERO; tgt.len()];
    }
    if src.len() * tgt.len() <= 1 << 14 {
        return tgt
            .clone()
            .map(|t| {
                src.clone()
                    .map(|j| f[j] * kernel_weight(t as i64 - j as i64))
                    .sum()
            })
            .collect();
    }
    // out_t = sum_k a_k b_{r-k} with a_k = f_{s+k}, b_m = w(m + m0), r = t - s - m0
    let s = src.start as i64;
    let m0 = tgt.start as i64 - (src.end as i64 - 1);
    let blen = tgt.len() + src.len() - 1;
    let size = (src.len() + blen).next_power_of_two();
    let (fwd, inv) = plans(size);
    let mut a = vec![ZERO; size];
    a[..src.len()].copy_from_slice(&f[src.clone()]);
    let mut b = vec![ZERO; size];
    for (m, slot) in b.iter_mut().enumerate().take(blen) {
        *slot = Complex64::new(kernel_weight(m as i64 + m0), 0.0);
    }
    fwd.process(&mut a);
    fwd.process(&mut b);
    for (x, y) in a.iter_mut().zip(&b) {
        *x *= y;
    }
    inv.process(&mut a);
    let scale = 1.0 / size as f64;
    tgt.map(|t| a[(t as i64 - s - m0) as usize] * scale).collect()
}

/// `M_{T,Q} f(x) = max over dyadic P with x in P, P strictly inside Q, of
/// max_{xi in P} |T(f 1_{3Q \ 3P})(xi)|`, for `x` in `Q` (zero elsewhere).
pub fn grand_maximal_local(
    op: &KernelOperator,
    f: &SampledFunction,
    q: &DyadicInterval,
) -> Result<SampledFunction> {
    grand_maximal_local_to(op, f, q, op.domain.depth())
}

/// As [`grand_maximal_local`], with `P` restricted to levels `<= finest`.
pub fn grand_maximal_local_to(
    op: &KernelOperator,
    f: &SampledFunction,
    q: &DyadicInterval,
    finest: u32,
) -> Result<SampledFunction> {
    op.check(f)?;
    if q.domain() != &op.domain {
        return Err(Error::DomainMismatch("interval on another window".into()));
    }
    let out = grand_maximal_values(f.values(), q, finest)?;
    let mut full = vec![0.0; op.domain.n_cells()];
    full[q.interval().cells()].copy_from_slice(&out);
    SampledFunction::from_real(op.domain, &full)
}

/// Values of `M_{T,Q}` on the cells of `q`.
pub(crate) fn grand_maximal_values(
    f: &[Complex64],
    q: &DyadicInterval,
    finest: u32,
) -> Result<Vec<f64>> {
    let qi = q.interval();
    let tq = qi.tripled()?;
    let base = local_transform(f, tq.cells(), qi.cells());
    let mut out = vec![0.0f64; qi.len()];
    let depth = q.domain().depth().min(finest);
    for level in (q.level() + 1)..=depth {
        let len = q.domain().n_cells() >> level;
        let count = qi.len() / len;
        let first = qi.start() / len;
        let maxima: Vec<f64> = (0..count)
            .into_par_iter()
            .map(|k| {
                let p = DyadicInterval::new(*q.domain(), level, first + k).expect("inside Q");
                let pi = p.interval();
                let tp = pi.tripled().expect("3P inside 3Q");
                let local = local_transform(f, tp.cells(), pi.cells());
                let off = pi.start() - qi.start();
                local
                    .iter()
                    .enumerate()
                    .map(|(c, v)| (base[off + c] - v).norm())
                    .fold(0.0, f64::max)
            })
            .collect();
        for (k, m) in maxima.into_iter().enumerate() {
            for o in &mut out[k * len..(k + 1) * len] {
                *o = o.max(m);
            }
        }
    }
    Ok(out)
}

/// Smallest `C` with `|T(f 1_{3Q})(x)| <= C |f(x)| + M_{T,Q} f(x)` on the
/// cells of `Q` (infinite if some cell has `f = 0` and a positive excess).
pub fn local_pointwise_constant(f: &SampledFunction, q: &DyadicInterval) -> Result<f64> {
    let qi = q.interval();
    let tq = qi.tripled()?;
    let t = local_transform(f.values(), tq.cells(), qi.cells());
    let m = grand_maximal_values(f.values(), q, q.domain().depth())?;
    let mut c = 0.0f64;
    for (k, i) in qi.cells().enumerate() {
        let excess = t[k].norm() - m[k];
        if excess > 1e-12 * t[k].norm().max(1.0) {
            let fx = f.value(i).norm();
            c = c.max(if fx > 0.0 { excess / fx } else { f64::INFINITY });
        }
    }
    Ok(c)
}
