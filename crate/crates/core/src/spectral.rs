//! Periodic grids, the discrete Fourier transform pair, spectral
//! differentiation, trigonometric interpolation and discrete norms.
//!
//! Coefficients are stored in FFT order: index `j < N/2` holds wavenumber
//! `k = j`, index `j >= N/2` holds `k = j - N`, so index `N/2` is the
//! Nyquist mode `k = -N/2`. The forward transform is unscaled and the
//! inverse carries the `1/N`; norm weights carry the grid spacing.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{KbfError, Result};

/// Relative imaginary residue above which grid values are not considered real.
pub const REALITY_TOL: f64 = 1e-8;

/// Tighter residue bound used when auditing solver states.
pub const STATE_REALITY_TOL: f64 = 1e-10;

/// Equispaced periodic grid on `[a, a + L)` together with cached FFT plans.
#[derive(Clone)]
pub struct GridSpec {
    n_modes: usize,
    domain_start: f64,
    domain_length: f64,
    points: Vec<f64>,
    wavenumber_scale: f64,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

pub type Grid = Arc<GridSpec>;

impl fmt::Debug for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GridSpec")
            .field("n_modes", &self.n_modes)
            .field("domain_start", &self.domain_start)
            .field("domain_length", &self.domain_length)
            .finish()
    }
}

impl PartialEq for GridSpec {
    fn eq(&self, other: &Self) -> bool {
        self.n_modes == other.n_modes
            && self.domain_start.to_bits() == other.domain_start.to_bits()
            && self.domain_length.to_bits() == other.domain_length.to_bits()
    }
}

/// Builds the grid `x_j = a + j L / N`, `j = 0..N`.
pub fn make_grid(n_modes: usize, domain_start: f64, domain_length: f64) -> Result<Grid> {
    GridSpec::new(n_modes, domain_start, domain_length).map(Arc::new)
}

impl GridSpec {
    pub fn new(n_modes: usize, domain_start: f64, domain_length: f64) -> Result<Self> {
        if n_modes < 4 || !n_modes.is_multiple_of(2) {
            return Err(KbfError::InvalidGrid(format!(
                "mode count must be even and at least 4, got {n_modes}"
            )));
        }
        if !domain_length.is_finite() || domain_length <= 0.0 {
            return Err(KbfError::InvalidGrid(format!(
                "domain length must be positive, got {domain_length}"
            )));
        }
        if !domain_start.is_finite() {
            return Err(KbfError::InvalidGrid("domain start must be finite".into()));
        }
        let h = domain_length / n_modes as f64;
        let points = (0..n_modes).map(|j| domain_start + j as f64 * h).collect();
        let mut planner = FftPlanner::new();
        Ok(Self {
            n_modes,
            domain_start,
            domain_length,
            points,
            wavenumber_scale: 2.0 * PI / domain_length,
            forward: planner.plan_fft_forward(n_modes),
            inverse: planner.plan_fft_inverse(n_modes),
        })
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn domain_start(&self) -> f64 {
        self.domain_start
    }

    pub fn domain_length(&self) -> f64 {
        self.domain_length
    }

    /// Grid spacing `h = L / N`.
    pub fn spacing(&self) -> f64 {
        self.domain_length / self.n_modes as f64
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    /// `2 pi / L`, converting integer wavenumbers to physical ones.
    pub fn wavenumber_scale(&self) -> f64 {
        self.wavenumber_scale
    }

    pub fn nyquist_index(&self) -> usize {
        self.n_modes / 2
    }

    /// Integer wavenumber stored at `index`.
    pub fn wavenumber(&self, index: usize) -> i64 {
        let n = self.n_modes as i64;
        let j = index as i64;
        if j < n / 2 {
            j
        } else {
            j - n
        }
    }

    /// Storage index of integer wavenumber `k` in `-N/2..N/2`.
    pub fn index_of(&self, k: i64) -> Option<usize> {
        let n = self.n_modes as i64;
        if k < -n / 2 || k >= n / 2 {
            return None;
        }
        Some(if k >= 0 { k as usize } else { (k + n) as usize })
    }

    /// Physical wavenumber `kappa = (2 pi / L) k` at `index`.
    pub fn physical_wavenumber(&self, index: usize) -> f64 {
        self.wavenumber_scale * self.wavenumber(index) as f64
    }

    /// Integer wavenumbers in storage order.
    pub fn wavenumbers(&self) -> impl Iterator<Item = i64> + '_ {
        (0..self.n_modes).map(move |j| self.wavenumber(j))
    }

    /// Index of the mode `-k` paired with `index` under conjugate symmetry.
    pub fn mirror_index(&self, index: usize) -> usize {
        (self.n_modes - index) % self.n_modes
    }

    pub(crate) fn fft_forward(&self, buf: &mut [Complex64]) {
        self.forward.process(buf);
    }

    pub(crate) fn fft_inverse(&self, buf: &mut [Complex64]) {
        self.inverse.process(buf);
        let scale = 1.0 / self.n_modes as f64;
        for c in buf.iter_mut() {
            *c *= scale;
        }
    }
}

/// Fourier coefficients of a grid function at one instant.
#[derive(Debug, Clone)]
pub struct SpectralState {
    coeffs: Vec<Complex64>,
    grid: Grid,
}

impl PartialEq for SpectralState {
    fn eq(&self, other: &Self) -> bool {
        self.coeffs == other.coeffs && *self.grid == *other.grid
    }
}

impl SpectralState {
    pub fn new(grid: Grid, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.n_modes() {
            return Err(KbfError::DimensionMismatch {
                expected: grid.n_modes(),
                found: coeffs.len(),
            });
        }
        Ok(Self { coeffs, grid })
    }

    pub fn zeros(grid: Grid) -> Self {
        let coeffs = vec![Complex64::new(0.0, 0.0); grid.n_modes()];
        Self { coeffs, grid }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    /// Coefficient of integer wavenumber `k`, if it is resolved on this grid.
    pub fn coeff(&self, k: i64) -> Option<Complex64> {
        self.grid.index_of(k).map(|j| self.coeffs[j])
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// Largest violation of Hermitian symmetry relative to the largest coefficient.
    pub fn reality_residue(&self) -> f64 {
        let scale = self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
        if scale == 0.0 {
            return 0.0;
        }
        let worst = (0..self.coeffs.len())
            .map(|j| {
                let m = self.grid.mirror_index(j);
                (self.coeffs[m] - self.coeffs[j].conj()).norm()
            })
            .fold(0.0, f64::max);
        worst / scale
    }

    pub fn is_real_representable(&self, tol: f64) -> bool {
        self.reality_residue() <= tol
    }

    pub fn same_grid(&self, other: &SpectralState) -> bool {
        Arc::ptr_eq(&self.grid, &other.grid) || *self.grid == *other.grid
    }

    pub(crate) fn check_same_grid(&self, other: &SpectralState) -> Result<()> {
        if self.same_grid(other) {
            Ok(())
        } else {
            Err(KbfError::GridMismatch)
        }
    }

    /// `self + alpha * other` on the same grid.
    pub fn add_scaled(&self, alpha: f64, other: &SpectralState) -> Result<SpectralState> {
        self.check_same_grid(other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a + b * alpha)
            .collect();
        Ok(SpectralState {
            coeffs,
            grid: self.grid.clone(),
        })
    }

    pub fn sub(&self, other: &SpectralState) -> Result<SpectralState> {
        self.add_scaled(-1.0, other)
    }

    pub fn scaled(&self, alpha: f64) -> SpectralState {
        SpectralState {
            coeffs: self.coeffs.iter().map(|c| c * alpha).collect(),
            grid: self.grid.clone(),
        }
    }

    /// Norm of the grid function represented by this state.
    pub fn norm(&self, spec: NormSpec) -> f64 {
        let g = &self.grid;
        let weight = g.spacing() / g.n_modes() as f64;
        let s = match spec.kind {
            NormKind::L2 => 0,
            NormKind::Hs => spec.s,
        };
        let sum: f64 = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(j, c)| {
                let kappa = g.physical_wavenumber(j);
                (1.0 + kappa * kappa).powi(s as i32) * c.norm_sqr()
            })
            .sum();
        (weight * sum).sqrt()
    }
}

/// Forward transform of real grid values.
pub fn to_spectral(values: &[f64], grid: &Grid) -> Result<SpectralState> {
    if values.len() != grid.n_modes() {
        return Err(KbfError::DimensionMismatch {
            expected: grid.n_modes(),
            found: values.len(),
        });
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(KbfError::NonFiniteInput);
    }
    let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    grid.fft_forward(&mut buf);
    Ok(SpectralState {
        coeffs: buf,
        grid: grid.clone(),
    })
}

/// Inverse transform back to real grid values.
pub fn to_physical(state: &SpectralState) -> Result<Vec<f64>> {
    let mut buf = state.coeffs.clone();
    state.grid.fft_inverse(&mut buf);
    let (max_re, max_im) = buf.iter().fold((0.0f64, 0.0f64), |(r, i), c| {
        (r.max(c.re.abs()), i.max(c.im.abs()))
    });
    let scale = max_re.max(max_im);
    if scale > 0.0 {
        let residue = max_im / scale;
        if residue > REALITY_TOL || !residue.is_finite() {
            return Err(KbfError::NotRealRepresentable { residue });
        }
    }
    Ok(buf.into_iter().map(|c| c.re).collect())
}

/// Spectral derivative of order `order`; odd orders zero the Nyquist mode.
pub fn derivative(state: &SpectralState, order: u32) -> Result<SpectralState> {
    if order == 0 {
        return Err(KbfError::Config("derivative order must be at least 1".into()));
    }
    let grid = state.grid.clone();
    let nyquist = grid.nyquist_index();
    let coeffs = state
        .coeffs
        .iter()
        .enumerate()
        .map(|(j, c)| {
            if j == nyquist && order % 2 == 1 {
                return Complex64::new(0.0, 0.0);
            }
            let ik = Complex64::new(0.0, grid.physical_wavenumber(j));
            c * ik.powu(order)
        })
        .collect();
    Ok(SpectralState { coeffs, grid })
}

/// Evaluates the trigonometric interpolant at arbitrary abscissae.
///
/// The Nyquist coefficient contributes a cosine so the interpolant stays
/// real between grid points.
pub fn eval_interpolant(state: &SpectralState, points: &[f64]) -> Result<Vec<f64>> {
    let residue = state.reality_residue();
    if residue > REALITY_TOL {
        return Err(KbfError::NotRealRepresentable { residue });
    }
    let g = &state.grid;
    let n = g.n_modes();
    let half = n / 2;
    let inv_n = 1.0 / n as f64;
    let c = &state.coeffs;
    Ok(points
        .iter()
        .map(|&x| {
            let theta = g.wavenumber_scale() * (x - g.domain_start());
            let mut acc = c[0].re;
            for (k, ck) in c.iter().enumerate().take(half).skip(1) {
                acc += 2.0 * (ck * Complex64::from_polar(1.0, k as f64 * theta)).re;
            }
            acc += c[half].re * (half as f64 * theta).cos();
            acc * inv_n
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormKind {
    L2,
    Hs,
}

/// Discrete `L2` or Sobolev `H^s` norm selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NormSpec {
    pub kind: NormKind,
    pub s: u32,
}

impl NormSpec {
    pub const fn l2() -> Self {
        NormSpec {
            kind: NormKind::L2,
            s: 0,
        }
    }

    pub const fn hs(s: u32) -> Self {
        NormSpec {
            kind: NormKind::Hs,
            s,
        }
    }
}

impl Default for NormSpec {
    fn default() -> Self {
        NormSpec::l2()
    }
}

impl fmt::Display for NormSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            NormKind::L2 => write!(f, "L2"),
            NormKind::Hs => write!(f, "H{}", self.s),
        }
    }
}

impl FromStr for NormSpec {
    type Err = KbfError;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if t.eq_ignore_ascii_case("l2") {
            return Ok(NormSpec::l2());
        }
        let digits = t
            .strip_prefix('H')
            .or_else(|| t.strip_prefix('h'))
            .ok_or_else(|| KbfError::Config(format!("unknown norm `{t}`")))?;
        digits
            .parse::<u32>()
            .map(NormSpec::hs)
            .map_err(|_| KbfError::Config(format!("unknown norm `{t}`")))
    }
}

/// Norm of real grid values.
pub fn norm_values(values: &[f64], grid: &Grid, spec: NormSpec) -> Result<f64> {
    if values.len() != grid.n_modes() {
        return Err(KbfError::DimensionMismatch {
            expected: grid.n_modes(),
            found: values.len(),
        });
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(KbfError::NonFiniteInput);
    }
    match spec.kind {
        NormKind::L2 => Ok((grid.spacing() * values.iter().map(|v| v * v).sum::<f64>()).sqrt()),
        NormKind::Hs => Ok(to_spectral(values, grid)?.norm(spec)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DealiasRule {
    #[default]
    None,
    TwoThirds,
}

impl fmt::Display for DealiasRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DealiasRule::None => "none",
            DealiasRule::TwoThirds => "two_thirds",
        })
    }
}

impl FromStr for DealiasRule {
    type Err = KbfError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "none" => Ok(DealiasRule::None),
            "two_thirds" | "2/3" => Ok(DealiasRule::TwoThirds),
            other => Err(KbfError::Config(format!("unknown dealias rule `{other}`"))),
        }
    }
}

/// Mode mask in storage order; `true` keeps the mode.
pub fn dealias_mask(grid: &GridSpec, rule: DealiasRule) -> Vec<bool> {
    match rule {
        DealiasRule::None => vec![true; grid.n_modes()],
        DealiasRule::TwoThirds => {
            let cutoff = (grid.n_modes() / 3) as i64;
            grid.wavenumbers().map(|k| k.abs() <= cutoff).collect()
        }
    }
}

pub fn apply_mask(state: &mut SpectralState, mask: &[bool]) {
    for (c, &keep) in state.coeffs.iter_mut().zip(mask) {
        if !keep {
            *c = Complex64::new(0.0, 0.0);
        }
    }
}

/// Smooth periodic functions on `[0, 2 pi)` used to probe interpolation error.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TestFunction {
    /// `1 / (2 + cos x)`, analytic in a strip.
    InverseTwoPlusCos,
    /// `exp(sin x)`, entire.
    ExpSin,
    /// `|sin x|^3`, finite smoothness.
    AbsSinCubed,
    /// `1/2 + sin(x)/4 + cos(3x)/10`, band-limited to `|k| <= 3`.
    BandLimited,
}

impl TestFunction {
    pub const ALL: [TestFunction; 4] = [
        TestFunction::InverseTwoPlusCos,
        TestFunction::ExpSin,
        TestFunction::AbsSinCubed,
        TestFunction::BandLimited,
    ];

    pub fn id(self) -> &'static str {
        match self {
            TestFunction::InverseTwoPlusCos => "inv_2_plus_cos",
            TestFunction::ExpSin => "exp_sin",
            TestFunction::AbsSinCubed => "abs_sin_cubed",
            TestFunction::BandLimited => "band_limited",
        }
    }

    pub fn eval(self, x: f64) -> f64 {
        match self {
            TestFunction::InverseTwoPlusCos => 1.0 / (2.0 + x.cos()),
            TestFunction::ExpSin => x.sin().exp(),
            TestFunction::AbsSinCubed => x.sin().abs().powi(3),
            TestFunction::BandLimited => 0.5 + 0.25 * x.sin() + 0.1 * (3.0 * x).cos(),
        }
    }
}

impl FromStr for TestFunction {
    type Err = KbfError;

    fn from_str(s: &str) -> Result<Self> {
        TestFunction::ALL
            .into_iter()
            .find(|f| f.id() == s.trim())
            .ok_or_else(|| KbfError::InvalidTestFunction(s.to_string()))
    }
}

/// Interpolation error `||f - I_N f||` for each `N`, measured on a reference
/// grid with `8 * max(N)` points. Pairs come back in ascending `N`.
pub fn interpolation_error_decay(
    function: TestFunction,
    norm: NormSpec,
    n_list: &[usize],
) -> Result<Vec<(usize, f64)>> {
    let mut ns = n_list.to_vec();
    ns.sort_unstable();
    ns.dedup();
    let n_max = *ns
        .last()
        .ok_or_else(|| KbfError::Config("empty mode list".into()))?;
    let reference = make_grid(8 * n_max, 0.0, 2.0 * PI)?;
    let exact: Vec<f64> = reference.points().iter().map(|&x| function.eval(x)).collect();

    ns.into_iter()
        .map(|n| {
            let grid = make_grid(n, 0.0, 2.0 * PI)?;
            let samples: Vec<f64> = grid.points().iter().map(|&x| function.eval(x)).collect();
            let state = to_spectral(&samples, &grid)?;
            let approx = eval_interpolant(&state, reference.points())?;
            let diff: Vec<f64> = approx.iter().zip(&exact).map(|(a, e)| a - e).collect();
            Ok((n, norm_values(&diff, &reference, norm)?))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn grid(n: usize) -> Grid {
        make_grid(n, 0.0, 2.0 * PI).unwrap()
    }

    fn sampled(g: &Grid, f: impl Fn(f64) -> f64) -> Vec<f64> {
        g.points().iter().map(|&x| f(x)).collect()
    }

    #[test]
    fn grid_points_match_partition() {
        let g = grid(4);
        let expected = [0.0, PI / 2.0, PI, 1.5 * PI];
        for (p, e) in g.points().iter().zip(expected) {
            assert_abs_diff_eq!(*p, e, epsilon = 1e-15);
        }
        let g = make_grid(6, -PI, 2.0 * PI).unwrap();
        let expected = [-PI, -2.0 * PI / 3.0, -PI / 3.0, 0.0, PI / 3.0, 2.0 * PI / 3.0];
        for (p, e) in g.points().iter().zip(expected) {
            assert_abs_diff_eq!(*p, e, epsilon = 1e-15);
        }
        let g = grid(256);
        assert_eq!(g.points().len(), 256);
        assert_abs_diff_eq!(g.spacing(), 2.0 * PI / 256.0, epsilon = 1e-16);
        assert!(g.points().windows(2).all(|w| w[1] > w[0]));
        assert!(*g.points().last().unwrap() < 2.0 * PI);
    }

    #[test]
    fn invalid_grids_rejected() {
        for (n, l) in [(5, 1.0), (2, 1.0), (0, 1.0), (8, 0.0), (8, -1.0), (8, f64::NAN)] {
            assert!(matches!(make_grid(n, 0.0, l), Err(KbfError::InvalidGrid(_))));
        }
    }

    #[test]
    fn wavenumber_layout() {
        let g = grid(8);
        let ks: Vec<i64> = g.wavenumbers().collect();
        assert_eq!(ks, vec![0, 1, 2, 3, -4, -3, -2, -1]);
        for k in -4..4 {
            assert_eq!(g.wavenumber(g.index_of(k).unwrap()), k);
        }
        assert_eq!(g.index_of(4), None);
        let g = make_grid(8, 0.0, PI).unwrap();
        assert_abs_diff_eq!(g.physical_wavenumber(1), 2.0, epsilon = 1e-15);
    }

    #[test]
    fn constant_is_dc_only() {
        let g = grid(16);
        let s = to_spectral(&[3.5; 16], &g).unwrap();
        assert_abs_diff_eq!(s.coeff(0).unwrap().re, 3.5 * 16.0, epsilon = 1e-13);
        for k in -8..8 {
            if k != 0 {
                assert!(s.coeff(k).unwrap().norm() <= 1e-14 * 16.0);
            }
        }
    }

    #[test]
    fn sine_has_single_conjugate_pair() {
        let g = grid(32);
        let s = to_spectral(&sampled(&g, f64::sin), &g).unwrap();
        for k in -16..16 {
            let c = s.coeff(k).unwrap();
            if k.abs() == 1 {
                assert!(c.norm() > 1.0);
            } else {
                assert!(c.norm() < 1e-13, "k={k} {c}");
            }
        }
        let p = s.coeff(1).unwrap();
        let m = s.coeff(-1).unwrap();
        assert!((p - m.conj()).norm() < 1e-13);
    }

    #[test]
    fn transform_errors() {
        let g = grid(8);
        assert!(matches!(
            to_spectral(&[0.0; 7], &g),
            Err(KbfError::DimensionMismatch { .. })
        ));
        let mut v = [0.0; 8];
        v[3] = f64::NAN;
        assert_eq!(to_spectral(&v, &g).unwrap_err(), KbfError::NonFiniteInput);
        let mut s = SpectralState::zeros(g.clone());
        s.coeffs_mut()[1] = Complex64::new(1.0, 0.0);
        assert!(matches!(
            to_physical(&s),
            Err(KbfError::NotRealRepresentable { .. })
        ));
    }

    #[test]
    fn inverse_of_zero_and_dc() {
        let g = grid(8);
        assert_eq!(to_physical(&SpectralState::zeros(g.clone())).unwrap(), vec![0.0; 8]);
        let mut s = SpectralState::zeros(g);
        s.coeffs_mut()[0] = Complex64::new(16.0, 0.0);
        for v in to_physical(&s).unwrap() {
            assert_abs_diff_eq!(v, 2.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn conjugate_pair_at_three() {
        // c_3 = N (a - i b) / 2 encodes a cos 3x + b sin 3x.
        let g = grid(16);
        let (a, b) = (0.7, -1.3);
        let mut s = SpectralState::zeros(g.clone());
        let c = Complex64::new(a, -b) * 8.0;
        s.coeffs_mut()[g.index_of(3).unwrap()] = c;
        s.coeffs_mut()[g.index_of(-3).unwrap()] = c.conj();
        let y = to_physical(&s).unwrap();
        for (x, v) in g.points().iter().zip(y) {
            let direct = a * (3.0 * x).cos() + b * (3.0 * x).sin();
            assert_abs_diff_eq!(v, direct, epsilon = 1e-14);
        }
    }

    #[test]
    fn derivatives_of_sines() {
        let g = grid(32);
        let s = to_spectral(&sampled(&g, f64::sin), &g).unwrap();
        let d = to_physical(&derivative(&s, 1).unwrap()).unwrap();
        for (x, v) in g.points().iter().zip(d) {
            assert_abs_diff_eq!(v, x.cos(), epsilon = 1e-12);
        }
        let s = to_spectral(&sampled(&g, |x| (2.0 * x).sin()), &g).unwrap();
        let d = to_physical(&derivative(&s, 5).unwrap()).unwrap();
        for (x, v) in g.points().iter().zip(d) {
            assert_abs_diff_eq!(v, 32.0 * (2.0 * x).cos(), epsilon = 1e-9);
        }
        assert!(derivative(&s, 0).is_err());
    }

    #[test]
    fn odd_derivative_drops_nyquist() {
        let g = grid(8);
        let alternating: Vec<f64> = (0..8).map(|j| if j % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let s = to_spectral(&alternating, &g).unwrap();
        let d1 = derivative(&s, 1).unwrap();
        assert!(d1.coeffs().iter().all(|c| c.norm() < 1e-14));
        let d2 = derivative(&s, 2).unwrap();
        assert_abs_diff_eq!(d2.coeffs()[4].re, -16.0 * 8.0, epsilon = 1e-12);
    }

    #[test]
    fn second_derivative_matches_fine_finite_differences() {
        // Oracle: band-limited function sampled on a 32x finer grid, fourth-order
        // centered differences, compared at the coarse points.
        let f = |x: f64| 0.3 * x.sin() + 0.2 * (2.0 * x).cos() - 0.1 * (5.0 * x).sin();
        let g = grid(32);
        let spectral = to_physical(&derivative(&to_spectral(&sampled(&g, f), &g).unwrap(), 2).unwrap())
            .unwrap();
        let fine_h = g.spacing() / 32.0;
        for (x, d) in g.points().iter().zip(spectral) {
            let fd = (-f(x + 2.0 * fine_h) + 16.0 * f(x + fine_h) - 30.0 * f(*x)
                + 16.0 * f(x - fine_h)
                - f(x - 2.0 * fine_h))
                / (12.0 * fine_h * fine_h);
            assert_abs_diff_eq!(d, fd, epsilon = 1e-7);
        }
    }

    #[test]
    fn interpolant_reproduces_grid_and_sine() {
        let g = grid(32);
        let s = to_spectral(&sampled(&g, |x| x.sin() + 0.5 * (4.0 * x).cos()), &g).unwrap();
        let at_grid = eval_interpolant(&s, g.points()).unwrap();
        for (a, b) in at_grid.iter().zip(to_physical(&s).unwrap()) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-12);
        }
        let s = to_spectral(&sampled(&g, f64::sin), &g).unwrap();
        let v = eval_interpolant(&s, &[PI / 7.0]).unwrap();
        assert_abs_diff_eq!(v[0], (PI / 7.0).sin(), epsilon = 1e-12);
        let c = to_spectral(&[2.25; 32], &g).unwrap();
        for v in eval_interpolant(&c, &[0.1, 1.7, 5.9, -3.0]).unwrap() {
            assert_abs_diff_eq!(v, 2.25, epsilon = 1e-13);
        }
    }

    #[test]
    fn interpolant_on_shifted_domain() {
        let g = make_grid(16, -PI, 2.0 * PI).unwrap();
        let s = to_spectral(&sampled(&g, |x| (2.0 * x).cos()), &g).unwrap();
        let v = eval_interpolant(&s, &[0.3]).unwrap();
        assert_abs_diff_eq!(v[0], 0.6f64.cos(), epsilon = 1e-13);
    }

    #[test]
    fn norm_examples() {
        let g = grid(64);
        for spec in [NormSpec::l2(), NormSpec::hs(0), NormSpec::hs(3)] {
            assert_eq!(SpectralState::zeros(g.clone()).norm(spec), 0.0);
        }
        let one = vec![1.0; 64];
        assert_abs_diff_eq!(
            norm_values(&one, &g, NormSpec::l2()).unwrap(),
            (2.0 * PI).sqrt(),
            epsilon = 1e-14
        );
        // H1 oracle: sqrt(||u||^2 + ||u'||^2) from the explicit derivative.
        let sin = sampled(&g, f64::sin);
        let cos = sampled(&g, f64::cos);
        let l2 = |v: &[f64]| norm_values(v, &g, NormSpec::l2()).unwrap();
        let oracle = (l2(&sin).powi(2) + l2(&cos).powi(2)).sqrt();
        assert_abs_diff_eq!(
            norm_values(&sin, &g, NormSpec::hs(1)).unwrap(),
            oracle,
            epsilon = 1e-10
        );
        assert_eq!(
            norm_values(&[f64::INFINITY; 64], &g, NormSpec::l2()).unwrap_err(),
            KbfError::NonFiniteInput
        );
    }

    #[test]
    fn norm_spec_parsing() {
        assert_eq!("L2".parse::<NormSpec>().unwrap(), NormSpec::l2());
        assert_eq!("H2".parse::<NormSpec>().unwrap(), NormSpec::hs(2));
        assert_eq!(NormSpec::hs(4).to_string(), "H4");
        assert!("W1".parse::<NormSpec>().is_err());
    }

    #[test]
    fn dealias_masks() {
        let count = |g: &GridSpec, r| dealias_mask(g, r).iter().filter(|&&b| b).count();
        let g = grid(12);
        let mask = dealias_mask(&g, DealiasRule::TwoThirds);
        for (j, keep) in mask.iter().enumerate() {
            assert_eq!(*keep, g.wavenumber(j).abs() <= 4);
        }
        assert_eq!(count(&g, DealiasRule::None), 12);
        let g = grid(256);
        assert_eq!(count(&g, DealiasRule::TwoThirds), 2 * 85 + 1);
        assert!(dealias_mask(&g, DealiasRule::None).iter().all(|&b| b));
    }

    #[test]
    fn test_function_ids() {
        for f in TestFunction::ALL {
            assert_eq!(f.id().parse::<TestFunction>().unwrap(), f);
        }
        assert!(matches!(
            "gaussian".parse::<TestFunction>(),
            Err(KbfError::InvalidTestFunction(_))
        ));
    }

    #[test]
    fn interpolation_decay_examples() {
        let pairs =
            interpolation_error_decay(TestFunction::InverseTwoPlusCos, NormSpec::l2(), &[32, 16])
                .unwrap();
        assert_eq!(pairs[0].0, 16);
        assert!(pairs[0].1 / pairs[1].1 >= 100.0, "{pairs:?}");

        let exact =
            interpolation_error_decay(TestFunction::BandLimited, NormSpec::l2(), &[8, 16]).unwrap();
        assert!(exact.iter().all(|(_, e)| *e <= 1e-13), "{exact:?}");

        let smooth = interpolation_error_decay(
            TestFunction::ExpSin,
            NormSpec::l2(),
            &[4, 8, 12, 16, 20, 24, 28, 32],
        )
        .unwrap();
        for w in smooth.windows(2) {
            assert!(w[1].1 < w[0].1 || w[0].1 < 1e-13, "{smooth:?}");
        }
    }
}
