//! The conservative bilinear forms: 2D Euler in vorticity form, 3D Euler in
//! velocity form (optional constant-vector Coriolis term), generalized SQG,
//! and the Sabra / GOY shell models, all behind one interface.
//!
//! Every variant satisfies the structural assumptions the construction rests
//! on: antisymmetry `<B(v,u),w> = -<B(v,w),u>` (hence the energy cancellation
//! `<B(u,u),u> = 0`), zero spatial mean of `B(u,u)`, divergence-free output
//! where applicable, and bilinearity. `verify_structure` checks all of them
//! on random Galerkin states and reports the worst relative violation.

use crate::spectral::{
    dealias_grid_size, quadrature_grid_size, Complex, FieldKind, GridWorkspace, Mode,
    ShellParams, SpectralField,
};
use crate::{Error, Result};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum ModelSpec {
    Euler2dVorticity,
    Euler3dVelocity { coriolis: Option<[f64; 3]> },
    Gsqg { alpha: f64 },
    Sabra { a: f64, b: f64, lambda: f64, k0: f64 },
    Goy { a: f64, b: f64, lambda: f64, k0: f64 },
}

/// Conserved functionals exposed by the models.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum ConservedFunctional {
    Energy,
    SecondaryH,
    /// Casimir integral of a polynomial of the scalar state; coefficients in
    /// ascending degree order.
    Casimir(Vec<f64>),
}

impl ModelSpec {
    pub fn name(&self) -> &'static str {
        match self {
            ModelSpec::Euler2dVorticity => "euler2d-vorticity",
            ModelSpec::Euler3dVelocity { .. } => "euler3d",
            ModelSpec::Gsqg { .. } => "gsqg",
            ModelSpec::Sabra { .. } => "sabra",
            ModelSpec::Goy { .. } => "goy",
        }
    }

    pub fn validate(&self, allow_singular: bool) -> Result<()> {
        match *self {
            ModelSpec::Euler2dVorticity => Ok(()),
            ModelSpec::Euler3dVelocity { .. } => Ok(()),
            ModelSpec::Gsqg { alpha } => {
                if alpha > 0.5 && !allow_singular {
                    Err(Error::Config(format!(
                        "gsqg alpha_sqg = {alpha} > 1/2 is a singular regime; \
                         pass --allow-singular to construct it anyway"
                    )))
                } else {
                    Ok(())
                }
            }
            ModelSpec::Sabra { lambda, k0, .. } | ModelSpec::Goy { lambda, k0, .. } => {
                if lambda <= 1.0 {
                    Err(Error::Config(format!("shell model needs lambda > 1, got {lambda}")))
                } else if k0 <= 0.0 {
                    Err(Error::Config(format!("shell model needs k0 > 0, got {k0}")))
                } else {
                    Ok(())
                }
            }
        }
    }

    pub fn state_kind(&self) -> (FieldKind, usize) {
        match self {
            ModelSpec::Euler2dVorticity | ModelSpec::Gsqg { .. } => (FieldKind::TorusScalar, 2),
            ModelSpec::Euler3dVelocity { .. } => (FieldKind::TorusVector, 3),
            ModelSpec::Sabra { .. } | ModelSpec::Goy { .. } => (FieldKind::Shell, 1),
        }
    }

    pub fn is_shell(&self) -> bool {
        matches!(self, ModelSpec::Sabra { .. } | ModelSpec::Goy { .. })
    }

    pub fn shell_params(&self) -> Option<ShellParams> {
        match *self {
            ModelSpec::Sabra { lambda, k0, .. } | ModelSpec::Goy { lambda, k0, .. } => {
                Some(ShellParams { k0, lambda })
            }
            _ => None,
        }
    }

    pub fn zero_state(&self, trunc: u32) -> Result<SpectralField> {
        match self.state_kind() {
            (FieldKind::TorusScalar, d) => SpectralField::zero_torus_scalar(d, trunc),
            (FieldKind::TorusVector, d) => SpectralField::zero_torus_vector(d, trunc),
            (FieldKind::Shell, _) => SpectralField::zero_shell(trunc, self.shell_params().unwrap()),
        }
    }

    pub fn random_state(
        &self,
        trunc: u32,
        decay: f64,
        rng: &mut impl Rng,
    ) -> Result<SpectralField> {
        match self.state_kind() {
            (FieldKind::TorusScalar, d) => SpectralField::random_torus_scalar(d, trunc, decay, rng),
            (FieldKind::TorusVector, d) => SpectralField::random_torus_vector(d, trunc, decay, rng),
            (FieldKind::Shell, _) => {
                SpectralField::random_shell(trunc, self.shell_params().unwrap(), decay, rng)
            }
        }
    }

    fn check_state(&self, u: &SpectralField) -> Result<()> {
        let (kind, dim) = self.state_kind();
        if u.kind() != kind || u.dim() != dim {
            return Err(Error::ShapeMismatch(format!(
                "state kind {:?}(d={}) does not match model {} ({:?}, d={})",
                u.kind(),
                u.dim(),
                self.name(),
                kind,
                dim
            )));
        }
        if let Some(p) = self.shell_params() {
            if u.shell_params() != Some(p) {
                return Err(Error::ShapeMismatch(
                    "shell parameters of state disagree with the model".into(),
                ));
            }
        }
        Ok(())
    }

    // ------------------------------------------------------------------
    // Velocity reconstruction for the active scalars
    // ------------------------------------------------------------------

    fn velocity_exponent(&self) -> Result<f64> {
        match *self {
            ModelSpec::Euler2dVorticity => Ok(-1.0),
            ModelSpec::Gsqg { alpha } => Ok(alpha - 1.0),
            _ => Err(Error::Unsupported(format!(
                "velocity_from_scalar applies to active scalar models, not {}",
                self.name()
            ))),
        }
    }

    /// Divergence-free velocity from the scalar state; per-mode multiplier
    /// `i (m2, -m1) |m|^(2(alpha-1))` (alpha = 0 reproduces Biot-Savart:
    /// cos(x1) maps to (0, sin x1)).
    pub fn velocity_from_scalar(&self, u: &SpectralField) -> Result<SpectralField> {
        self.check_state(u)?;
        let expo = self.velocity_exponent()?;
        let mut out = SpectralField::zero_torus_vector(u.dim(), u.truncation())?;
        let i = Complex::new(0.0, 1.0);
        for m in u.modes() {
            let w = u.eigenvalue(&m).powf(expo);
            let c = u.coeff(0, &m);
            out.set_coeff(0, &m, i * (m[1] as f64) * w * c);
            out.set_coeff(1, &m, -i * (m[0] as f64) * w * c);
        }
        Ok(out)
    }

    // ------------------------------------------------------------------
    // The bilinear form
    // ------------------------------------------------------------------

    /// `Pi_N B(u, v)`; `u` is the advecting slot.
    pub fn bilinear(&self, u: &SpectralField, v: &SpectralField) -> Result<SpectralField> {
        Ok(self.bilinear_with_mean(u, v)?.0)
    }

    /// Like `bilinear` but also returns the magnitude of the spatial mean of
    /// the un-truncated product (exactly zero in theory; a structure check).
    pub fn bilinear_with_mean(
        &self,
        u: &SpectralField,
        v: &SpectralField,
    ) -> Result<(SpectralField, f64)> {
        self.check_state(u)?;
        self.check_state(v)?;
        u.assert_compatible(v)?;
        match self {
            ModelSpec::Euler2dVorticity | ModelSpec::Gsqg { .. } => self.bilinear_scalar(u, v),
            ModelSpec::Euler3dVelocity { coriolis } => self.bilinear_vector(u, v, *coriolis),
            ModelSpec::Sabra { a, b, lambda, k0 } => {
                Ok((shell_bracket(u, v, *a, *b, *lambda, *k0, false), 0.0))
            }
            ModelSpec::Goy { a, b, lambda, k0 } => {
                Ok((shell_bracket(u, v, *a, *b, *lambda, *k0, true), 0.0))
            }
        }
    }

    /// Active scalars: `B(u,v) = K[u] . grad v`, evaluated pseudo-spectrally
    /// on a quadratic de-aliasing grid.
    fn bilinear_scalar(
        &self,
        u: &SpectralField,
        v: &SpectralField,
    ) -> Result<(SpectralField, f64)> {
        let expo = self.velocity_exponent()?;
        let d = u.dim();
        let msize = dealias_grid_size(u.kmax(), 2, d)?;
        let mut ws = GridWorkspace::new(d, msize);
        let i = Complex::new(0.0, 1.0);
        let vel0 = ws.to_grid_with(u, 0, |m| {
            let msq = (m[0] as f64).powi(2) + (m[1] as f64).powi(2);
            i * (m[1] as f64) * msq.powf(expo)
        });
        let vel1 = ws.to_grid_with(u, 0, |m| {
            let msq = (m[0] as f64).powi(2) + (m[1] as f64).powi(2);
            -i * (m[0] as f64) * msq.powf(expo)
        });
        let dv0 = ws.to_grid_with(v, 0, |m| i * (m[0] as f64));
        let dv1 = ws.to_grid_with(v, 0, |m| i * (m[1] as f64));
        let prod: Vec<Complex> = (0..vel0.len())
            .map(|p| Complex::new(vel0[p].re * dv0[p].re + vel1[p].re * dv1[p].re, 0.0))
            .collect();
        let mut out = SpectralField::zero_torus_scalar(d, u.truncation())?;
        let mean = ws.from_grid(&prod, &mut out, 0);
        Ok((out, mean.abs()))
    }

    /// 3D Euler velocity form: `B(u,v) = Leray((u . grad) v)`, plus the
    /// optional Coriolis symmetrization with a constant vector f.
    fn bilinear_vector(
        &self,
        u: &SpectralField,
        v: &SpectralField,
        coriolis: Option<[f64; 3]>,
    ) -> Result<(SpectralField, f64)> {
        let d = u.dim();
        let msize = dealias_grid_size(u.kmax(), 2, d)?;
        let mut ws = GridWorkspace::new(d, msize);
        let i = Complex::new(0.0, 1.0);
        let vel: Vec<Vec<Complex>> = (0..d).map(|c| ws.to_grid(u, c)).collect();
        let mut out = SpectralField::zero_torus_vector(d, u.truncation())?;
        let mut mean_abs = 0.0f64;
        for c in 0..d {
            let parts: Vec<Vec<Complex>> =
                (0..d).map(|j| ws.to_grid_with(v, c, |m| i * (m[j] as f64))).collect();
            let prod: Vec<Complex> = (0..vel[0].len())
                .map(|p| {
                    let mut acc = 0.0;
                    for j in 0..d {
                        acc += vel[j][p].re * parts[j][p].re;
                    }
                    Complex::new(acc, 0.0)
                })
                .collect();
            let mean = ws.from_grid(&prod, &mut out, c);
            mean_abs = mean_abs.max(mean.abs());
        }
        let mut out = out.leray_project()?;
        if let Some(f) = coriolis {
            // Leray(f x v) on the transported slot, coefficient-wise since f
            // is constant. On the diagonal this is the usual Coriolis force
            // Leray(f x u), and off the diagonal it keeps the antisymmetry
            // <B(v,u),w> = -<B(v,w),u> exact via <f x u, w> = -<f x w, u>.
            let mut cor = SpectralField::zero_torus_vector(d, u.truncation())?;
            for m in u.modes() {
                let b = cross_at(&f, v, &m);
                for c in 0..d {
                    cor.set_coeff(c, &m, b[c]);
                }
            }
            let cor = cor.leray_project()?;
            out.axpy(1.0, &cor);
        }
        Ok((out, mean_abs))
    }

    // ------------------------------------------------------------------
    // Conserved functionals
    // ------------------------------------------------------------------

    /// Kinetic-type energy `E(u) = 1/2 ||u||^2`.
    pub fn energy(&self, u: &SpectralField) -> f64 {
        0.5 * u.l2_norm_sq()
    }

    /// The per-mode weight of the quadratic second invariant, where defined:
    /// shells `(-a/(a+b))^n`, gSQG `|m|^(2(alpha-1))`.
    pub fn secondary_weight(&self, state: &SpectralField, m: &Mode) -> Result<f64> {
        match *self {
            ModelSpec::Sabra { a, b, .. } | ModelSpec::Goy { a, b, .. } => {
                let denom = a + b;
                if denom == 0.0 {
                    return Err(Error::Unsupported(
                        "second invariant undefined for a + b = 0".into(),
                    ));
                }
                let ratio = -a / denom;
                if ratio.abs() >= 1.0 {
                    return Err(Error::Unsupported(format!(
                        "shell second invariant requires |a/(a+b)| < 1, got {}",
                        ratio.abs()
                    )));
                }
                Ok(ratio.powi(m[0]))
            }
            ModelSpec::Gsqg { alpha } => Ok(state.eigenvalue(m).powf(alpha - 1.0)),
            _ => Err(Error::Unsupported(format!(
                "model {} has no tracked second invariant",
                self.name()
            ))),
        }
    }

    /// Quadratic second invariant `H(u) = 1/2 sum w_m |u_m|^2` (with the
    /// `(2 pi)^d` volume factor for torus states).
    pub fn secondary_hamiltonian(&self, u: &SpectralField) -> Result<f64> {
        self.check_state(u)?;
        let grad = self.secondary_gradient(u)?;
        Ok(0.5 * grad.inner_product(u)?)
    }

    /// Gradient of H: the multiplier field `W u`, so `DH(u)[v] = <W u, v>`.
    pub fn secondary_gradient(&self, u: &SpectralField) -> Result<SpectralField> {
        self.check_state(u)?;
        match self {
            ModelSpec::Sabra { .. } | ModelSpec::Goy { .. } | ModelSpec::Gsqg { .. } => {
                let mut out = u.clone();
                for m in u.modes() {
                    let w = self.secondary_weight(u, &m)?;
                    out.set_coeff(0, &m, u.coeff(0, &m) * w);
                }
                Ok(out)
            }
            _ => Err(Error::Unsupported(format!(
                "(model {}, secondary-H) is not a supported pair",
                self.name()
            ))),
        }
    }

    /// Casimir `integral f(u) dx` for active scalars; `f` given by polynomial
    /// coefficients in ascending degree. Exact quadrature via degree-matched
    /// padding.
    pub fn casimir(&self, u: &SpectralField, f: &[f64]) -> Result<f64> {
        self.check_state(u)?;
        if u.kind() != FieldKind::TorusScalar {
            return Err(Error::Unsupported(format!(
                "(model {}, casimir) is not a supported pair; casimirs need a scalar state",
                self.name()
            )));
        }
        let deg = f.len().saturating_sub(1).max(1);
        let msize = quadrature_grid_size(u.kmax(), deg, 1.0, u.dim())?;
        let mut ws = GridWorkspace::new(u.dim(), msize);
        let g = ws.to_grid(u, 0);
        let mut acc = 0.0;
        for z in &g {
            let x = z.re;
            let mut fx = 0.0;
            for &c in f.iter().rev() {
                fx = fx * x + c;
            }
            acc += fx;
        }
        Ok(acc * ws.quad_weight())
    }

    pub fn conserved(&self, u: &SpectralField, which: &ConservedFunctional) -> Result<f64> {
        match which {
            ConservedFunctional::Energy => Ok(self.energy(u)),
            ConservedFunctional::SecondaryH => self.secondary_hamiltonian(u),
            ConservedFunctional::Casimir(coeffs) => self.casimir(u, coeffs),
        }
    }

    // ------------------------------------------------------------------
    // Structure verification
    // ------------------------------------------------------------------

    /// Randomized check of the structural assumptions; returns the worst
    /// relative violation per property over `trials` random states.
    pub fn verify_structure(&self, trunc: u32, trials: u32, seed: u64) -> Result<StructureReport> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut rep = StructureReport {
            model: self.name().to_string(),
            trunc,
            trials,
            ..Default::default()
        };
        let tiny = 1e-300;
        for _ in 0..trials {
            let u = self.random_state(trunc, 0.3, &mut rng)?;
            let v = self.random_state(trunc, 0.3, &mut rng)?;
            let w = self.random_state(trunc, 0.3, &mut rng)?;

            // cancellation <B(v,u),u> = 0
            let (bvu, mean_vu) = self.bilinear_with_mean(&v, &u)?;
            let c = bvu.inner_product(&u)?.abs();
            let c_rel = c / (bvu.l2_norm() * u.l2_norm() + tiny);
            rep.cancellation = rep.cancellation.max(c_rel);

            // antisymmetry <B(v,u),w> = -<B(v,w),u>
            let bvw = self.bilinear(&v, &w)?;
            let lhs = bvu.inner_product(&w)?;
            let rhs = bvw.inner_product(&u)?;
            let a_rel = (lhs + rhs).abs()
                / (bvu.l2_norm() * w.l2_norm() + bvw.l2_norm() * u.l2_norm() + tiny);
            rep.antisymmetry = rep.antisymmetry.max(a_rel);

            // zero spatial mean of B(u,u) before truncation
            let (buu, mean_uu) = self.bilinear_with_mean(&u, &u)?;
            let vol_sqrt = if u.is_torus() { u.volume().sqrt() } else { 1.0 };
            let zm = mean_uu.max(mean_vu) * vol_sqrt / (buu.l2_norm() + tiny);
            rep.zero_mean = rep.zero_mean.max(zm);

            // divergence-free output (vector models) / velocity (scalars)
            let div_rel = match self.state_kind().0 {
                FieldKind::TorusVector => relative_divergence(&buu),
                FieldKind::TorusScalar => relative_divergence(&self.velocity_from_scalar(&u)?),
                FieldKind::Shell => 0.0,
            };
            rep.divergence = rep.divergence.max(div_rel);

            // bilinearity in the second slot
            let (alpha, beta) = (0.7, -1.3);
            let mut comb = v.scaled(alpha);
            comb.axpy(beta, &w);
            let b_comb = self.bilinear(&u, &comb)?;
            let mut b_sep = self.bilinear(&u, &v)?.scaled(alpha);
            b_sep.axpy(beta, &self.bilinear(&u, &w)?);
            let diff = b_comb.sub(&b_sep)?;
            let b_rel = diff.l2_norm() / (b_sep.l2_norm() + b_comb.l2_norm() + tiny);
            rep.bilinearity = rep.bilinearity.max(b_rel);
        }
        Ok(rep)
    }
}

fn cross_at(f: &[f64; 3], u: &SpectralField, m: &Mode) -> [Complex; 3] {
    let a = [u.coeff(0, m), u.coeff(1, m), u.coeff(2, m)];
    [
        f[1] * a[2] - f[2] * a[1],
        f[2] * a[0] - f[0] * a[2],
        f[0] * a[1] - f[1] * a[0],
    ]
}

fn relative_divergence(u: &SpectralField) -> f64 {
    let mut worst = 0.0f64;
    for m in u.modes() {
        let mut dot = Complex::new(0.0, 0.0);
        let mut csq = 0.0;
        for c in 0..u.components() {
            dot += (m[c] as f64) * u.coeff(c, &m);
            csq += u.coeff(c, &m).norm_sqr();
        }
        let mnorm = u.eigenvalue(&m).sqrt();
        let rel = dot.norm() / (mnorm * csq.sqrt() + 1e-300);
        worst = worst.max(rel);
    }
    worst
}

/// Sabra and GOY brackets. `u` is the advecting slot, `v` the transported
/// one; shells outside `1..=N` are treated as zero. The GOY bracket is the
/// conjugated variant with negated backward terms, which is the standard
/// energy-preserving form (checked numerically by `verify_structure` and the
/// conservation tests).
fn shell_bracket(
    u: &SpectralField,
    v: &SpectralField,
    a: f64,
    b: f64,
    lambda: f64,
    k0: f64,
    goy: bool,
) -> SpectralField {
    let n = u.truncation() as i64;
    let get = |f: &SpectralField, j: i64| -> Complex {
        if j < 1 || j > n {
            Complex::new(0.0, 0.0)
        } else {
            f.shell_coeff(j as u32)
        }
    };
    let lam = |e: i64| -> f64 { lambda.powi(e as i32) };
    let mut out = u.clone();
    for j in 1..=n {
        let term = if !goy {
            a * lam(j + 1) * get(v, j + 2) * get(u, j + 1).conj()
                + b * lam(j) * get(v, j + 1) * get(u, j - 1).conj()
                + a * lam(j - 1) * get(u, j - 1) * get(v, j - 2)
                + b * lam(j - 1) * get(v, j - 1) * get(u, j - 2)
        } else {
            (a * lam(j + 1) * get(v, j + 2) * get(u, j + 1)
                + b * lam(j) * get(v, j + 1) * get(u, j - 1)
                - a * lam(j - 1) * get(u, j - 1) * get(v, j - 2)
                - b * lam(j - 1) * get(v, j - 1) * get(u, j - 2))
            .conj()
        };
        out.set_shell_coeff(j as u32, Complex::new(0.0, -k0) * term);
    }
    out
}

/// Worst relative violations of the structural assumptions over a batch of
/// random states.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct StructureReport {
    pub model: String,
    pub trunc: u32,
    pub trials: u32,
    pub cancellation: f64,
    pub antisymmetry: f64,
    pub zero_mean: f64,
    pub divergence: f64,
    pub bilinearity: f64,
}

impl StructureReport {
    pub fn worst(&self) -> f64 {
        self.cancellation
            .max(self.antisymmetry)
            .max(self.zero_mean)
            .max(self.divergence)
            .max(self.bilinearity)
    }

    pub fn pass(&self, tol: f64) -> bool {
        self.worst() <= tol
    }
}
