//! Equations of motion for the combination coefficients and their integration.
//!
//! Real time solves `E a' = -i D a`; imaginary time solves
//! `E a' = -(D a - <H> E a)`. `E` is routinely singular because moment
//! states are linearly dependent, so every solve goes through an eigenvalue
//! cutoff relative to the largest eigenvalue of `E`.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{QasError, Result};
use crate::linalg::{hermitian_eigen, retained_spectrum, CMatrix, CVector, I};
use crate::overlaps::{expectation_of_hamiltonian, OverlapMatrices};

/// Relative Hermiticity tolerance for `E` in solves.
pub const GRAM_HERMITIAN_TOL: f64 = 1e-8;

/// Default relative eigenvalue cutoff for the pseudo-inverse of `E`.
pub const DEFAULT_CUTOFF: f64 = 1e-10;

/// Most negative `epsilon_t` accepted as roundoff before clipping to zero.
pub const ERROR_ESTIMATE_FLOOR: f64 = -1e-8;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    ExplicitEuler,
    #[default]
    Rk4,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Real,
    Imaginary,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorConfig {
    pub method: Method,
    pub dt: f64,
    pub t_final: f64,
    pub regularization_cutoff: f64,
    pub renormalize_each_step: bool,
    pub use_realified_solver: bool,
    /// Record every `record_every`-th step (the final step is always recorded).
    pub record_every: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            method: Method::Rk4,
            dt: 1e-3,
            t_final: 0.0,
            regularization_cutoff: DEFAULT_CUTOFF,
            renormalize_each_step: false,
            use_realified_solver: false,
            record_every: 1,
        }
    }
}

impl IntegratorConfig {
    /// Defaults for a mode: imaginary time renormalizes every step.
    pub fn for_mode(mode: Mode, t_final: f64) -> Self {
        IntegratorConfig {
            t_final,
            renormalize_each_step: mode == Mode::Imaginary,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(QasError::Configuration(format!(
                "dt must be positive, got {}",
                self.dt
            )));
        }
        if !(self.t_final >= 0.0 && self.t_final.is_finite()) {
            return Err(QasError::Configuration(format!(
                "t_final must be non-negative, got {}",
                self.t_final
            )));
        }
        if !(0.0..1.0).contains(&self.regularization_cutoff) {
            return Err(QasError::Configuration(format!(
                "regularization_cutoff must lie in [0, 1), got {}",
                self.regularization_cutoff
            )));
        }
        if self.record_every == 0 {
            return Err(QasError::Configuration(
                "record_every must be at least 1".into(),
            ));
        }
        Ok(())
    }

    fn num_steps(&self) -> usize {
        if self.t_final == 0.0 {
            0
        } else {
            (self.t_final / self.dt - 1e-9).ceil().max(1.0) as usize
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub alphas: Vec<CVector>,
    /// `alpha^dagger E alpha`.
    pub norm: Vec<f64>,
    /// `<H>` at each recorded time.
    pub energy: Vec<f64>,
    pub epsilon_t: Option<Vec<f64>>,
    pub observables: Vec<(String, Vec<f64>)>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn observable(&self, name: &str) -> Option<&[f64]> {
        self.observables
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v.as_slice())
    }

    /// CSV with header `t,[alpha columns],norm,energy,[epsilon_t],observables...,extra...`.
    /// Floats are written with 17 significant digits.
    pub fn write_csv<W: Write>(
        &self,
        mut out: W,
        include_alphas: bool,
        extra: &[(String, Vec<f64>)],
    ) -> std::io::Result<()> {
        let m = self.alphas.first().map_or(0, |a| a.len());
        let mut header = vec!["t".to_string()];
        if include_alphas {
            for i in 0..m {
                header.push(format!("alpha{i}_re"));
                header.push(format!("alpha{i}_im"));
            }
        }
        header.push("norm".into());
        header.push("energy".into());
        if self.epsilon_t.is_some() {
            header.push("epsilon_t".into());
        }
        header.extend(self.observables.iter().map(|(n, _)| n.clone()));
        header.extend(extra.iter().map(|(n, _)| n.clone()));
        writeln!(out, "{}", header.join(","))?;

        let f = |x: f64| format!("{x:.16e}");
        for k in 0..self.len() {
            let mut row = vec![f(self.times[k])];
            if include_alphas {
                for a in self.alphas[k].iter() {
                    row.push(f(a.re));
                    row.push(f(a.im));
                }
            }
            row.push(f(self.norm[k]));
            row.push(f(self.energy[k]));
            if let Some(eps) = &self.epsilon_t {
                row.push(f(eps[k]));
            }
            for (_, v) in self.observables.iter().chain(extra) {
                row.push(f(v[k]));
            }
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// Solves `E x = rhs` through the eigen-decomposition of `E`, inverting only
/// eigenvalues `>= cutoff * lambda_max`.
pub fn regularized_solve(e: &CMatrix, rhs: &CVector, cutoff: f64) -> Result<CVector> {
    QasError::check_dim(e.nrows(), rhs.len())?;
    let eig = hermitian_eigen(e, GRAM_HERMITIAN_TOL)?;
    let (keep, _) = retained_spectrum(&eig, cutoff)?;
    let mut x = CVector::zeros(rhs.len());
    for k in keep {
        let v = eig.vectors.column(k);
        let coeff = v.dotc(rhs) / eig.values[k];
        x.axpy(coeff, &v, Complex64::new(1.0, 0.0));
    }
    Ok(x)
}

/// `a'` for real-time evolution.
pub fn alpha_dot_real(m: &OverlapMatrices, alpha: &CVector, cutoff: f64) -> Result<CVector> {
    QasError::check_dim(m.dim(), alpha.len())?;
    let rhs = (&m.d * alpha) * (-I);
    regularized_solve(&m.e, &rhs, cutoff)
}

/// `a'` for imaginary-time evolution.
pub fn alpha_dot_imag(m: &OverlapMatrices, alpha: &CVector, cutoff: f64) -> Result<CVector> {
    let energy = expectation_of_hamiltonian(alpha, m)?;
    let g = &m.d * alpha - (&m.e * alpha) * Complex64::new(energy, 0.0);
    regularized_solve(&m.e, &(-g), cutoff)
}

/// Real `2m x 2m` embedding `[[A_re, -A_im], [A_im, A_re]]` of a complex matrix.
pub fn realify(a: &CMatrix) -> DMatrix<f64> {
    let m = a.nrows();
    let n = a.ncols();
    DMatrix::from_fn(2 * m, 2 * n, |i, j| {
        let z = a[(i % m, j % n)];
        match (i < m, j < n) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    })
}

pub fn realify_vector(v: &CVector) -> DVector<f64> {
    let m = v.len();
    DVector::from_fn(2 * m, |i, _| if i < m { v[i].re } else { v[i - m].im })
}

pub fn complexify_vector(v: &DVector<f64>) -> CVector {
    let m = v.len() / 2;
    CVector::from_fn(m, |i, _| Complex64::new(v[i], v[i + m]))
}

/// Realified left side `E` and right-side matrix of `-i D`, so that
/// `E_r a'_r = R a_r` is the real form of `E a' = -i D a`.
pub fn realify_system(e: &CMatrix, d: &CMatrix) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    if e.nrows() != e.ncols() || d.nrows() != d.ncols() {
        return Err(QasError::Argument("overlap matrices must be square".into()));
    }
    QasError::check_dim(e.nrows(), d.nrows())?;
    Ok((realify(e), realify(&(d * (-I)))))
}

/// Pseudo-inverse of a real symmetric matrix with a relative eigenvalue cutoff.
fn real_pseudo_inverse(a: &DMatrix<f64>, cutoff: f64) -> Result<DMatrix<f64>> {
    let sym = (a + a.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let lmax = eig.eigenvalues.iter().copied().fold(0.0f64, f64::max);
    if lmax <= 0.0 || !lmax.is_finite() {
        return Err(QasError::Singular("Gram matrix is numerically zero".into()));
    }
    let n = a.nrows();
    let mut out = DMatrix::zeros(n, n);
    for k in 0..n {
        let l = eig.eigenvalues[k];
        if l >= cutoff * lmax && l > 0.0 {
            let v = eig.eigenvectors.column(k);
            out += (v * v.transpose()) / l;
        }
    }
    Ok(out)
}

/// `a'` from the realified real-time system.
pub fn alpha_dot_realified(m: &OverlapMatrices, alpha: &CVector, cutoff: f64) -> Result<CVector> {
    let (er, rhs) = realify_system(&m.e, &m.d)?;
    let pinv = real_pseudo_inverse(&er, cutoff)?;
    Ok(complexify_vector(&(pinv * (rhs * realify_vector(alpha)))))
}

/// `|| (d/dt + iH) |phi> ||^2` from overlap matrices:
/// `a'^+ E a' + i a'^+ D a - i a^+ D a' + a^+ F a`.
pub fn error_estimate(m: &OverlapMatrices, alpha: &CVector, alpha_dot: &CVector) -> Result<f64> {
    let f = m.f.as_ref().ok_or_else(|| {
        QasError::Configuration("error estimate needs the H^2 overlap matrix".into())
    })?;
    QasError::check_dim(m.dim(), alpha.len())?;
    QasError::check_dim(m.dim(), alpha_dot.len())?;
    let da = &m.d * alpha;
    let eps = alpha_dot.dotc(&(&m.e * alpha_dot)) + I * alpha_dot.dotc(&da)
        - I * da.dotc(alpha_dot)
        + alpha.dotc(&(f * alpha));
    if eps.re < ERROR_ESTIMATE_FLOOR {
        return Err(QasError::Data(format!(
            "negative error estimate {:.3e}",
            eps.re
        )));
    }
    Ok(eps.re.max(0.0))
}

/// Time-independent right-hand side, precomputed once per evolve call.
enum Engine {
    /// Coordinates `b` in the orthonormalized retained range of `E`:
    /// `a = null + W b` with `W = V_k L_k^{-1/2}`, where the dynamics read
    /// `b' = -i H b` (real) or `b' = -(H - <H>) b` (imaginary) with
    /// `H = W^+ D W`. The dynamics ignore `null`, but norm, energy and
    /// observables are reported for the full `a`.
    Whitened {
        w: CMatrix,
        h_eff: CMatrix,
        null: CVector,
        null_scale: f64,
        norm: Quad,
        energy: Quad,
        observables: Vec<Quad>,
    },
    /// Real `2m` coordinates with the realified pseudo-inverse applied per stage.
    Realified {
        e_r: DMatrix<f64>,
        d_r: DMatrix<f64>,
        e_pinv: DMatrix<f64>,
        /// `E_r^+ (-iD)_r`
        real_rhs: DMatrix<f64>,
        observables: Vec<DMatrix<f64>>,
    },
}

/// `a^+ M a` split over `a = s n + W b`; `M` enters through its Hermitian part.
struct Quad {
    eff: CMatrix,
    /// `W^+ M n`
    cross: CVector,
    /// `n^+ M n`
    base: f64,
}

impl Quad {
    fn new(w: &CMatrix, m: &CMatrix) -> Self {
        Quad {
            eff: w.adjoint() * m * w,
            cross: CVector::zeros(w.ncols()),
            base: 0.0,
        }
    }

    fn set_null(&mut self, w: &CMatrix, m: &CMatrix, null: &CVector) {
        let herm = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
        let mn = &herm * null;
        self.cross = w.adjoint() * &mn;
        self.base = null.dotc(&mn).re;
    }

    fn value(&self, b: &CVector, s: f64) -> f64 {
        s * s * self.base + 2.0 * s * self.cross.dotc(b).re + b.dotc(&(&self.eff * b)).re
    }
}

/// Integration state: either whitened coordinates or realified alpha.
#[derive(Clone)]
enum Coords {
    C(CVector),
    R(DVector<f64>),
}

impl Coords {
    fn axpy(&self, h: f64, k: &Coords) -> Coords {
        match (self, k) {
            (Coords::C(a), Coords::C(b)) => Coords::C(a + b * Complex64::new(h, 0.0)),
            (Coords::R(a), Coords::R(b)) => Coords::R(a + b * h),
            _ => unreachable!("mixed coordinate kinds"),
        }
    }

    fn is_finite(&self) -> bool {
        match self {
            Coords::C(a) => a.iter().all(|z| z.re.is_finite() && z.im.is_finite()),
            Coords::R(a) => a.iter().all(|x| x.is_finite()),
        }
    }
}

impl Engine {
    fn build(
        m: &OverlapMatrices,
        cfg: &IntegratorConfig,
        observables: &[(String, CMatrix)],
    ) -> Result<Self> {
        for (name, o) in observables {
            if o.nrows() != m.dim() || o.ncols() != m.dim() {
                return Err(QasError::Argument(format!(
                    "observable '{name}' is {}x{}, basis has {} states",
                    o.nrows(),
                    o.ncols(),
                    m.dim()
                )));
            }
        }
        if cfg.use_realified_solver {
            let (e_r, minus_i_d) = realify_system(&m.e, &m.d)?;
            let e_pinv = real_pseudo_inverse(&e_r, cfg.regularization_cutoff)?;
            Ok(Engine::Realified {
                real_rhs: &e_pinv * minus_i_d,
                d_r: realify(&m.d),
                e_r,
                e_pinv,
                observables: observables.iter().map(|(_, o)| realify(o)).collect(),
            })
        } else {
            let eig = hermitian_eigen(&m.e, GRAM_HERMITIAN_TOL)?;
            let (keep, _) = retained_spectrum(&eig, cfg.regularization_cutoff)?;
            let w = CMatrix::from_fn(m.dim(), keep.len(), |i, c| {
                eig.vectors[(i, keep[c])] / eig.values[keep[c]].sqrt()
            });
            let energy = Quad::new(&w, &m.d);
            Ok(Engine::Whitened {
                h_eff: energy.eff.clone(),
                norm: Quad::new(&w, &m.e),
                energy,
                observables: observables.iter().map(|(_, o)| Quad::new(&w, o)).collect(),
                null: CVector::zeros(m.dim()),
                null_scale: 1.0,
                w,
            })
        }
    }

    /// Splits `alpha0` into integration coordinates (and the fixed null part).
    fn start(
        &mut self,
        m: &OverlapMatrices,
        alpha0: &CVector,
        obs_mats: &[(String, CMatrix)],
    ) -> Coords {
        match self {
            Engine::Whitened {
                w,
                null,
                norm,
                energy,
                observables,
                ..
            } => {
                // b = W^+ E a, and W W^+ E is the projector onto the retained range.
                let b = w.adjoint() * (&m.e * alpha0);
                *null = alpha0 - &*w * &b;
                norm.set_null(w, &m.e, null);
                energy.set_null(w, &m.d, null);
                for (q, (_, o)) in observables.iter_mut().zip(obs_mats) {
                    q.set_null(w, o, null);
                }
                Coords::C(b)
            }
            Engine::Realified { .. } => Coords::R(realify_vector(alpha0)),
        }
    }

    fn norm_energy(&self, x: &Coords) -> (f64, f64) {
        match (self, x) {
            (
                Engine::Whitened {
                    norm,
                    energy,
                    null_scale,
                    ..
                },
                Coords::C(b),
            ) => {
                let n = norm.value(b, *null_scale);
                (n, energy.value(b, *null_scale) / n)
            }
            (Engine::Realified { e_r, d_r, .. }, Coords::R(a)) => {
                let n = a.dot(&(e_r * a));
                (n, a.dot(&(d_r * a)) / n)
            }
            _ => unreachable!(),
        }
    }

    fn derivative(&self, x: &Coords, mode: Mode) -> Coords {
        match (self, x) {
            (Engine::Whitened { h_eff, .. }, Coords::C(b)) => {
                let hb = h_eff * b;
                match mode {
                    Mode::Real => Coords::C(hb * (-I)),
                    Mode::Imaginary => {
                        let energy = b.dotc(&hb).re / b.norm_squared();
                        Coords::C(b * Complex64::new(energy, 0.0) - hb)
                    }
                }
            }
            (
                Engine::Realified {
                    e_r,
                    d_r,
                    e_pinv,
                    real_rhs,
                    ..
                },
                Coords::R(a),
            ) => match mode {
                Mode::Real => Coords::R(real_rhs * a),
                Mode::Imaginary => {
                    let da = d_r * a;
                    let ea = e_r * a;
                    let energy = a.dot(&da) / a.dot(&ea);
                    Coords::R(-(e_pinv * (da - ea * energy)))
                }
            },
            _ => unreachable!(),
        }
    }

    fn alpha(&self, x: &Coords) -> CVector {
        match (self, x) {
            (
                Engine::Whitened {
                    w,
                    null,
                    null_scale,
                    ..
                },
                Coords::C(b),
            ) => null * Complex64::new(*null_scale, 0.0) + w * b,
            (_, Coords::R(a)) => complexify_vector(a),
            _ => unreachable!(),
        }
    }

    fn alpha_dot(&self, dx: &Coords) -> CVector {
        match (self, dx) {
            (Engine::Whitened { w, .. }, Coords::C(db)) => w * db,
            (_, Coords::R(da)) => complexify_vector(da),
            _ => unreachable!(),
        }
    }

    fn observables(&self, x: &Coords, norm: f64) -> Vec<f64> {
        match (self, x) {
            (
                Engine::Whitened {
                    observables,
                    null_scale,
                    ..
                },
                Coords::C(b),
            ) => observables
                .iter()
                .map(|o| o.value(b, *null_scale) / norm)
                .collect(),
            (Engine::Realified { observables, .. }, Coords::R(a)) => {
                observables.iter().map(|o| a.dot(&(o * a)) / norm).collect()
            }
            _ => unreachable!(),
        }
    }

    fn rescale(&mut self, x: &mut Coords, s: f64) {
        match (self, x) {
            (Engine::Whitened { null_scale, .. }, Coords::C(b)) => {
                *b /= Complex64::new(s, 0.0);
                *null_scale /= s;
            }
            (Engine::Realified { .. }, Coords::R(a)) => *a /= s,
            _ => unreachable!(),
        }
    }
}

/// Integrates the coefficient equations from `alpha0` to `cfg.t_final`.
///
/// `observables` are basis-overlap matrices `M`; each is recorded as
/// `alpha^+ M alpha / alpha^+ E alpha`. When `m.f` is present and the mode is
/// real, `epsilon_t` is recorded too.
pub fn evolve(
    m: &OverlapMatrices,
    alpha0: &CVector,
    cfg: &IntegratorConfig,
    mode: Mode,
    observables: &[(String, CMatrix)],
) -> Result<Trajectory> {
    cfg.validate()?;
    QasError::check_dim(m.dim(), alpha0.len())?;
    let norm0 = alpha0.dotc(&(&m.e * alpha0)).re;
    if (norm0 - 1.0).abs() > 1e-8 {
        return Err(QasError::Argument(format!(
            "initial coefficients must satisfy a^+ E a = 1, got {norm0}"
        )));
    }

    let mut engine = Engine::build(m, cfg, observables)?;
    let mut x = engine.start(m, alpha0, observables);
    let track_error = m.f.is_some() && mode == Mode::Real;

    let mut traj = Trajectory {
        epsilon_t: track_error.then(Vec::new),
        observables: observables
            .iter()
            .map(|(n, _)| (n.clone(), Vec::new()))
            .collect(),
        ..Default::default()
    };

    let record = |traj: &mut Trajectory,
                  engine: &Engine,
                  x: &Coords,
                  t: f64,
                  alpha_override: Option<&CVector>|
     -> Result<()> {
        let (norm, energy) = engine.norm_energy(x);
        traj.times.push(t);
        traj.alphas
            .push(alpha_override.cloned().unwrap_or_else(|| engine.alpha(x)));
        traj.norm.push(norm);
        traj.energy.push(energy);
        for ((_, series), v) in traj.observables.iter_mut().zip(engine.observables(x, norm)) {
            series.push(v);
        }
        if let Some(eps) = traj.epsilon_t.as_mut() {
            let alpha = engine.alpha(x);
            let alpha_dot = engine.alpha_dot(&engine.derivative(x, mode));
            eps.push(error_estimate(m, &alpha, &alpha_dot)?);
        }
        Ok(())
    };

    record(&mut traj, &engine, &x, 0.0, Some(alpha0))?;

    let n_steps = cfg.num_steps();
    for step in 1..=n_steps {
        let t_prev = (step - 1) as f64 * cfg.dt;
        let t = if step == n_steps {
            cfg.t_final
        } else {
            step as f64 * cfg.dt
        };
        let h = t - t_prev;
        x = match cfg.method {
            Method::ExplicitEuler => x.axpy(h, &engine.derivative(&x, mode)),
            Method::Rk4 => {
                let k1 = engine.derivative(&x, mode);
                let k2 = engine.derivative(&x.axpy(h / 2.0, &k1), mode);
                let k3 = engine.derivative(&x.axpy(h / 2.0, &k2), mode);
                let k4 = engine.derivative(&x.axpy(h, &k3), mode);
                x.axpy(h / 6.0, &k1)
                    .axpy(h / 3.0, &k2)
                    .axpy(h / 3.0, &k3)
                    .axpy(h / 6.0, &k4)
            }
        };
        if !x.is_finite() {
            return Err(QasError::Divergence { step, time: t });
        }
        if cfg.renormalize_each_step {
            let (norm, _) = engine.norm_energy(&x);
            if !(norm > 0.0) {
                return Err(QasError::Divergence { step, time: t });
            }
            engine.rescale(&mut x, norm.sqrt());
        }
        if step % cfg.record_every == 0 || step == n_steps {
            record(&mut traj, &engine, &x, t, None)?;
        }
    }
    Ok(traj)
}
