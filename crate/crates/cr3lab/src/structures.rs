//! Admissible coframes, the Tanaka-Webster structure solver, conformal
//! rescaling and the model-structure library.
//!
//! A coframe is a pair `(θ, θ¹)` stored over the reference coframe together
//! with its dual frame `(T, Z₁)`. Admissibility means `dθ = i θ¹ ∧ θ¹̄`
//! within tolerance and is checked, never assumed. The structure solver
//! recovers the connection form `ω₁¹`, the torsion coefficient `A₁₁` and the
//! Webster scalar curvature `R` from the first structure equation
//! `dθ¹ = θ¹ ∧ ω₁¹ + A₁̄₁̄ θ ∧ θ¹̄` and the curvature expansion of `dω₁¹`.

use crate::field::{exp_series, Dir, Field};
use crate::forms::{wedge, FrameVector, OneForm, TwoForm};

use crate::operators::{cov, Weighted};
use crate::sampling::named_exponent;
use crate::workspace::Workspace;
use crate::{Error, Result, Scalar, C, I};
use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

/// Conformal exponent: either a named test exponent or explicit
/// coefficients.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ExponentSpec {
    Named(String),
    Coefficients(Field),
}

impl ExponentSpec {
    pub fn to_field(&self) -> Result<Field> {
        match self {
            ExponentSpec::Named(name) => named_exponent(name)
                .ok_or_else(|| Error::Config(format!("unknown exponent name '{name}'"))),
            ExponentSpec::Coefficients(f) => Ok(f.clone()),
        }
    }
}

fn default_exponent() -> ExponentSpec {
    ExponentSpec::Named("re_zwbar".to_string())
}

fn default_eps() -> Scalar {
    0.1
}

/// Model structures available to the laboratory.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelSpec {
    /// The standard CR 3-sphere.
    Sphere,
    /// Left-invariant deformation: `θ` fixed, `θ¹ₐ = cosh(t) θ¹ + sinh(t) θ¹̄`
    /// with `t = ln a`. Degenerates to the round sphere at `a = 1` and has
    /// constant curvature `R(a) = a² + a⁻²` and constant torsion
    /// `A₁₁(a) = i(a² − a⁻²)`.
    LeftInvariant { a: Scalar },
    /// Conformal perturbation `θ̃ = e^{2 ε g} θ` of a base model.
    Perturbed {
        #[serde(default)]
        base: Option<Box<ModelSpec>>,
        #[serde(default = "default_eps")]
        eps: Scalar,
        #[serde(default = "default_exponent")]
        g: ExponentSpec,
    },
}

impl ModelSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            ModelSpec::Sphere => Ok(()),
            ModelSpec::LeftInvariant { a } => {
                if *a > 0.0 {
                    Ok(())
                } else {
                    Err(Error::Config(format!(
                        "left-invariant parameter a = {a} must be > 0"
                    )))
                }
            }
            ModelSpec::Perturbed { base, eps, g } => {
                if *eps < 0.0 || *eps > 0.25 {
                    return Err(Error::Config(format!(
                        "amplitude eps = {eps} outside the series budget [0, 0.25]"
                    )));
                }
                let gf = g.to_field()?;
                if gf.reality_defect() > 1e-12 {
                    return Err(Error::Config("exponent g must be real".into()));
                }
                if let Some(b) = base {
                    b.validate()?;
                }
                Ok(())
            }
        }
    }

    pub fn label(&self) -> String {
        match self {
            ModelSpec::Sphere => "sphere".into(),
            ModelSpec::LeftInvariant { a } => format!("left_invariant(a={a})"),
            ModelSpec::Perturbed { base, eps, .. } => {
                let b = base
                    .as_ref()
                    .map(|b| b.label())
                    .unwrap_or_else(|| "sphere".into());
                format!("perturbed(base={b}, eps={eps})")
            }
        }
    }
}

/// Residuals of the coframe contracts.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CoframeReport {
    /// `‖dθ − i θ¹∧θ¹̄‖` (L², and max over validation points).
    pub admissibility_l2: Scalar,
    pub admissibility_max: Scalar,
    /// Reality defect of `θ`.
    pub theta_reality: Scalar,
    /// Max defect of the nine duality pairings `θⁱ(E_j) = δ_ij`.
    pub duality: Scalar,
    /// Minimum of `|θ∧dθ / θ₀∧dθ₀|` over validation points (contact
    /// non-degeneracy).
    pub contact_min: Scalar,
}

/// An admissible coframe with its dual frame and volume density.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Coframe {
    pub theta: OneForm,
    pub theta1: OneForm,
    /// Reeb field of `θ` (dual to the coframe).
    pub reeb: FrameVector,
    /// Frame vector dual to `θ¹`.
    pub z1: FrameVector,
    /// Density of `θ∧dθ` against the reference `θ₀∧dθ₀` (a real field).
    pub vol_weight: Field,
}

impl Coframe {
    pub fn theta1_bar(&self) -> OneForm {
        self.theta1.conj()
    }

    pub fn z1_bar(&self) -> FrameVector {
        self.z1.conj()
    }

    /// Density of `η ∧ dη` relative to `θ₀∧dθ₀` (the reference contact form
    /// maps to the constant 1).
    pub fn volume_density(ws: &Workspace, theta: &OneForm) -> Field {
        let d = theta.d(ws);
        let c3 = ws
            .mul(&theta.t, &d.pm)
            .sub(&ws.mul(&theta.p, &d.tm))
            .add(&ws.mul(&theta.m, &d.tp));
        c3.scale(-I)
    }

    pub fn validate(&self, ws: &Workspace) -> CoframeReport {
        let adm = self
            .theta
            .d(ws)
            .sub(&wedge(ws, &self.theta1, &self.theta1_bar()).scale(I));
        let pts = ws.validation_points();
        let pair = |f: &OneForm, v: &FrameVector, expect: Scalar| {
            f.eval_on(ws, v)
                .sub(&Field::real_constant(expect))
                .l2_norm()
        };
        let t1b = self.theta1_bar();
        let z1b = self.z1_bar();
        let duality = [
            pair(&self.theta, &self.reeb, 1.0),
            pair(&self.theta, &self.z1, 0.0),
            pair(&self.theta, &z1b, 0.0),
            pair(&self.theta1, &self.reeb, 0.0),
            pair(&self.theta1, &self.z1, 1.0),
            pair(&self.theta1, &z1b, 0.0),
            pair(&t1b, &self.reeb, 0.0),
            pair(&t1b, &self.z1, 0.0),
            pair(&t1b, &z1b, 1.0),
        ]
        .into_iter()
        .fold(0.0, Scalar::max);
        let contact_min = pts
            .iter()
            .map(|p| self.vol_weight.eval(*p).norm())
            .fold(Scalar::INFINITY, Scalar::min);
        CoframeReport {
            admissibility_l2: adm.l2_norm(),
            admissibility_max: adm.max_at(pts),
            theta_reality: self.theta.sub(&self.theta.conj()).l2_norm(),
            duality,
            contact_min,
        }
    }
}

/// The reference round-sphere coframe.
pub fn sphere_coframe() -> Coframe {
    Coframe {
        theta: OneForm::theta_ref(),
        theta1: OneForm::theta1_ref(),
        reeb: FrameVector::reeb_ref(),
        z1: FrameVector::z1_ref(),
        vol_weight: Field::one(),
    }
}

/// Left-invariant deformation with parameter `a > 0`.
///
/// The hyperbolic rotation `θ¹ₐ = C θ¹ + S θ¹̄` with `C = (a + 1/a)/2`,
/// `S = (a − 1/a)/2` keeps `dθ = i θ¹ₐ ∧ θ¹̄ₐ` exactly (`C² − S² = 1`)
/// while deforming the CR structure away from the round one.
pub fn left_invariant_coframe(a: Scalar) -> Coframe {
    let c = 0.5 * (a + 1.0 / a);
    let s = 0.5 * (a - 1.0 / a);
    let mut theta1 = OneForm::theta1_ref().scale(C::new(c, 0.0));
    theta1.m = Field::real_constant(s);
    let z1 = FrameVector {
        t: Field::zero(),
        z1: Field::real_constant(c),
        z1b: Field::real_constant(-s),
    };
    Coframe {
        theta: OneForm::theta_ref(),
        theta1,
        reeb: FrameVector::reeb_ref(),
        z1,
        vol_weight: Field::one(),
    }
}

/// Closed-form invariants of the left-invariant family, derived once from
/// the constant structure equations; the solver tests use them as the
/// independent oracle.
pub mod left_invariant_golden {
    use crate::{Scalar, C};

    pub fn r(a: Scalar) -> Scalar {
        a * a + 1.0 / (a * a)
    }

    pub fn a11(a: Scalar) -> C {
        C::new(0.0, a * a - 1.0 / (a * a))
    }

    /// Cartan tensor `Q₁₁(a) = (3/2)(a⁴ − a⁻⁴)`.
    pub fn q11(a: Scalar) -> Scalar {
        1.5 * (a.powi(4) - a.powi(-4))
    }
}

/// Options for the conformal rescale and the structure solver.
#[derive(Clone, Copy, Debug)]
pub struct SolveOptions {
    /// Exponential series order for conformal factors.
    pub exp_order: usize,
    /// Admissibility tolerance; `NonAdmissible` beyond this.
    pub admissibility_tol: Scalar,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            exp_order: 12,
            admissibility_tol: 1e-6,
        }
    }
}

/// Conformal rescale `θ̃ = e^{2λ} θ` for a real polynomial exponent `λ`.
///
/// `θ̃¹ = e^{λ}(θ¹ + c θ)` with the correction field `c` solved from the
/// admissibility equation `dθ̃ = i θ̃¹ ∧ θ̃¹̄` by least squares (the analytic
/// value is `c = 2i λ,₁̄` in the base frame; the solve recovers it without
/// assuming it).
pub fn rescale_with_lambda(
    ws: &Workspace,
    base: &Coframe,
    lambda: &Field,
    opts: &SolveOptions,
) -> Result<Coframe> {
    if lambda.reality_defect() > 1e-10 {
        return Err(Error::Config("conformal exponent must be real".into()));
    }
    let cap = ws.cap();
    let phi = exp_series(&lambda.scale(C::new(2.0, 0.0)), opts.exp_order, cap);
    let min_phi = ws
        .validation_points()
        .iter()
        .map(|p| phi.eval(*p).re)
        .fold(Scalar::INFINITY, Scalar::min);
    if min_phi <= 0.0 {
        return Err(Error::NotPositive { min: min_phi });
    }
    let sqrt_phi = exp_series(lambda, opts.exp_order, cap);
    let inv_phi = exp_series(&lambda.scale(C::new(-2.0, 0.0)), opts.exp_order, cap);
    let inv_sqrt = exp_series(&lambda.neg(), opts.exp_order, cap);

    let theta_new = base.theta.scale_field(ws, &phi);
    let p_theta = base.theta.scale_field(ws, &sqrt_phi);
    let p_theta1 = base.theta1.scale_field(ws, &sqrt_phi);
    let p_theta1b = p_theta1.conj();

    // residual(c) = E0 − i c ⊙ W1 − i c̄ ⊙ W2
    let e0 = theta_new
        .d(ws)
        .sub(&wedge(ws, &p_theta1, &p_theta1b).scale(I));
    let w1 = wedge(ws, &p_theta, &p_theta1b);
    let w2 = wedge(ws, &p_theta1, &p_theta);

    let base_frame_deg = base.z1.z1.degree().max(base.z1.z1b.degree());
    let mut n_c = (lambda.degree() + base_frame_deg + 2).min(cap);
    let correction = loop {
        let c_field = solve_correction(ws, &e0, &w1, &w2, n_c)?;
        let resid = e0
            .sub(&w1.scale_field(ws, &c_field).scale(I))
            .sub(&w2.scale_field(ws, &c_field.conj()).scale(I));
        if resid.l2_norm() <= opts.admissibility_tol || n_c >= cap {
            break c_field;
        }
        n_c = (n_c + 2).min(cap);
    };

    let theta1_new = base
        .theta1
        .add(&base.theta.scale_field(ws, &correction))
        .scale_field(ws, &sqrt_phi);
    let scale_vec = |v: &FrameVector, f: &Field| FrameVector {
        t: ws.mul(&v.t, f),
        z1: ws.mul(&v.z1, f),
        z1b: ws.mul(&v.z1b, f),
    };
    let z1_new = scale_vec(&base.z1, &inv_sqrt);
    // T̃ = Φ⁻¹ (T − c Z₁ − c̄ Z₁̄) in the base frame
    let minus_c = ws.mul(&correction, &inv_phi).neg();
    let part0 = scale_vec(&base.reeb, &inv_phi);
    let part1 = scale_vec(&base.z1, &minus_c);
    let part2 = scale_vec(&base.z1_bar(), &minus_c.conj());
    let reeb_new = FrameVector {
        t: part0.t.add(&part1.t).add(&part2.t),
        z1: part0.z1.add(&part1.z1).add(&part2.z1),
        z1b: part0.z1b.add(&part1.z1b).add(&part2.z1b),
    };

    let vol = ws.mul(&base.vol_weight, &ws.mul(&phi, &phi));
    let cf = Coframe {
        theta: theta_new,
        theta1: theta1_new,
        reeb: reeb_new,
        z1: z1_new,
        vol_weight: vol,
    };
    let report = cf.validate(ws);
    if report.admissibility_l2 > opts.admissibility_tol {
        return Err(Error::NonAdmissible {
            residual: report.admissibility_l2,
            tol: opts.admissibility_tol,
        });
    }
    Ok(cf)
}

/// Conformal rescale by a positive factor `Φ` given as a field; the exponent
/// is recovered through the pointwise layer and projected.
pub fn conformal_rescale(
    ws: &Workspace,
    base: &Coframe,
    phi: &Field,
    opts: &SolveOptions,
) -> Result<Coframe> {
    let min_phi = ws
        .validation_points()
        .iter()
        .map(|p| phi.eval(*p).re)
        .fold(Scalar::INFINITY, Scalar::min);
    if min_phi <= 0.0 {
        return Err(Error::NotPositive { min: min_phi });
    }
    let (lambda, _resid, _cond) =
        ws.project_fn(|p| C::new(0.5 * phi.eval(p).re.ln(), 0.0), ws.cap().min(12))?;
    rescale_with_lambda(ws, base, &lambda.re(), opts)
}

/// Solves `E0 = i c W1 + i c̄ W2` pointwise (a 6×2 real least-squares per
/// sample point, over `x = Re c, y = Im c`) and projects the resulting
/// values to a field of degree `≤ n_c`.
fn solve_correction(
    ws: &Workspace,
    e0: &TwoForm,
    w1: &TwoForm,
    w2: &TwoForm,
    n_c: usize,
) -> Result<Field> {
    let mut values = Vec::with_capacity(ws.projection_points().len());
    for p in ws.projection_points().to_vec() {
        let e = [e0.tp.eval(p), e0.tm.eval(p), e0.pm.eval(p)];
        let u = [w1.tp.eval(p), w1.tm.eval(p), w1.pm.eval(p)];
        let v = [w2.tp.eval(p), w2.tm.eval(p), w2.pm.eval(p)];
        // per unit x: i(u + v); per unit y: −u + v (from c = x + iy, c̄ = x − iy)
        let mut ata = [[0.0; 2]; 2];
        let mut atb = [0.0; 2];
        for k in 0..3 {
            let col_x = I * (u[k] + v[k]);
            let col_y = v[k] - u[k];
            for (part_x, part_y, rhs) in
                [(col_x.re, col_y.re, e[k].re), (col_x.im, col_y.im, e[k].im)]
            {
                ata[0][0] += part_x * part_x;
                ata[0][1] += part_x * part_y;
                ata[1][1] += part_y * part_y;
                atb[0] += part_x * rhs;
                atb[1] += part_y * rhs;
            }
        }
        let det = ata[0][0] * ata[1][1] - ata[0][1] * ata[0][1];
        if det.abs() < 1e-30 {
            // degenerate only when both wedge columns vanish; c is then free
            values.push(C::new(0.0, 0.0));
            continue;
        }
        let x = (atb[0] * ata[1][1] - atb[1] * ata[0][1]) / det;
        let y = (ata[0][0] * atb[1] - ata[0][1] * atb[0]) / det;
        values.push(C::new(x, y));
    }
    let (c_field, _resid, _cond) = ws.project_values(&values, n_c)?;
    Ok(c_field)
}

/// Builds the coframe of a model specification.
pub fn build_model(ws: &Workspace, spec: &ModelSpec, opts: &SolveOptions) -> Result<Coframe> {
    spec.validate()?;
    match spec {
        ModelSpec::Sphere => Ok(sphere_coframe()),
        ModelSpec::LeftInvariant { a } => Ok(left_invariant_coframe(*a)),
        ModelSpec::Perturbed { base, eps, g } => {
            let base_cf = match base {
                Some(b) => build_model(ws, b, opts)?,
                None => sphere_coframe(),
            };
            let lambda = g.to_field()?.scale(C::new(*eps, 0.0)).re();
            rescale_with_lambda(ws, &base_cf, &lambda, opts)
        }
    }
}

/// Report of the generic Reeb-field solve.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReebReport {
    pub vector: FrameVector,
    /// Max of `|θ(T) − 1|` at validation points.
    pub normalization_residual: Scalar,
    /// Max of `|dθ(T, Z₁)|, |dθ(T, Z₁̄)|` at validation points.
    pub contraction_residual: Scalar,
    /// Least-squares projection residual of the component functions.
    pub projection_residual: Scalar,
}

/// Solves `θ(T) = 1`, `dθ(T, ·) = 0` pointwise and projects the component
/// functions back to fields at the smallest sufficient degree. Independent
/// of the closed-form dual frames the model builders carry.
pub fn reeb(ws: &Workspace, theta: &OneForm) -> Result<ReebReport> {
    let d = theta.d(ws);
    let pts: Vec<_> = ws.validation_points().to_vec();
    let solve_at = |p: crate::points::SPoint, idx: usize| -> Result<Vector3<C>> {
        // rows: θ(v) = 1, dθ(v, Z₁) = 0, dθ(v, Z₁̄) = 0
        let m = Matrix3::new(
            theta.t.eval(p),
            theta.p.eval(p),
            theta.m.eval(p),
            d.tp.eval(p),
            C::new(0.0, 0.0),
            -d.pm.eval(p),
            d.tm.eval(p),
            d.pm.eval(p),
            C::new(0.0, 0.0),
        );
        let rhs = Vector3::new(C::new(1.0, 0.0), C::new(0.0, 0.0), C::new(0.0, 0.0));
        m.lu().solve(&rhs).ok_or(Error::Singular { index: idx })
    };
    let mut vals_t = Vec::with_capacity(ws.projection_points().len());
    let mut vals_z = Vec::with_capacity(ws.projection_points().len());
    let mut vals_zb = Vec::with_capacity(ws.projection_points().len());
    for (idx, p) in ws.projection_points().to_vec().into_iter().enumerate() {
        let v = solve_at(p, idx)?;
        vals_t.push(v[0]);
        vals_z.push(v[1]);
        vals_zb.push(v[2]);
    }
    let mut deg = 2usize;
    loop {
        let (t, r1, _) = ws.project_values(&vals_t, deg)?;
        let (z1, r2, _) = ws.project_values(&vals_z, deg)?;
        let (z1b, r3, _) = ws.project_values(&vals_zb, deg)?;
        let vector = FrameVector { t, z1, z1b };
        let norm_res = theta.eval_on(ws, &vector).sub(&Field::one()).max_at(&pts);
        let c1 = d.eval_on(ws, &vector, &FrameVector::z1_ref()).max_at(&pts);
        let c2 = d
            .eval_on(ws, &vector, &FrameVector::z1_ref().conj())
            .max_at(&pts);
        let report = ReebReport {
            vector,
            normalization_residual: norm_res,
            contraction_residual: c1.max(c2),
            projection_residual: r1.max(r2).max(r3),
        };
        if (norm_res.max(c1).max(c2) < 1e-9 && report.projection_residual < 1e-9) || deg >= ws.cap()
        {
            return Ok(report);
        }
        deg = (deg + 2).min(ws.cap());
    }
}

/// Residuals reported by the structure solver.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StructureResiduals {
    /// Re-substitution into `dθ¹ = θ¹∧ω₁¹ + A₁̄₁̄ θ∧θ¹̄` (L²).
    pub resubstitution: Scalar,
    /// Reality defect of the solved `ω₁¹` (`‖ω + ω̄‖`).
    pub omega_reality: Scalar,
    /// Reality defect of the curvature field `R`.
    pub r_reality: Scalar,
    pub coframe: CoframeReport,
}

/// Tanaka-Webster data of an admissible coframe.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StructureData {
    pub coframe: Coframe,
    /// Connection form `ω₁¹` over the reference coframe.
    pub omega: OneForm,
    /// `ω₁¹(T)`, `ω₁¹(Z₁)`, `ω₁¹(Z₁̄)` in the structure's own frame.
    pub omega_t: Field,
    pub omega_z1: Field,
    pub omega_z1b: Field,
    /// Pseudohermitian torsion coefficient.
    pub a11: Field,
    /// Tanaka-Webster scalar curvature.
    pub r: Field,
    pub residuals: StructureResiduals,
}

impl StructureData {
    pub fn a11_bar(&self) -> Field {
        self.a11.conj()
    }

    /// Weighted integral against the structure's own volume form. The
    /// product with the volume density is exact: integration is terminal,
    /// so no degree cap applies here.
    pub fn integrate_w(&self, _ws: &Workspace, f: &Field) -> C {
        crate::field::integrate_product(f, &self.coframe.vol_weight)
    }

    /// Exact weighted integral of a product `∫ f g dμ` (no conjugation).
    pub fn integrate_pair_w(&self, ws: &Workspace, f: &Field, g: &Field) -> C {
        self.integrate_w(ws, &f.mul(g))
    }

    pub fn inner_w(&self, ws: &Workspace, f: &Field, g: &Field) -> C {
        self.integrate_w(ws, &f.mul(&g.conj()))
    }

    pub fn norm_w(&self, ws: &Workspace, f: &Field) -> Scalar {
        self.inner_w(ws, f, f).re.max(0.0).sqrt()
    }

    pub fn is_sasakian(&self, ws: &Workspace, tol: Scalar) -> bool {
        self.norm_w(ws, &self.a11) <= tol
    }

    /// Connection value `ω₁¹(dir)` in the structure frame.
    pub fn omega_at(&self, dir: Dir) -> &Field {
        match dir {
            Dir::T => &self.omega_t,
            Dir::Z1 => &self.omega_z1,
            Dir::Z1bar => &self.omega_z1b,
        }
    }
}

/// Solves the first structure equation on an admissible coframe.
pub fn solve_structure(ws: &Workspace, cf: &Coframe, opts: &SolveOptions) -> Result<StructureData> {
    let report = cf.validate(ws);
    if report.admissibility_l2 > opts.admissibility_tol {
        return Err(Error::NonAdmissible {
            residual: report.admissibility_l2,
            tol: opts.admissibility_tol,
        });
    }
    let z1b = cf.z1_bar();
    let dtheta1 = cf.theta1.d(ws);
    let b_t1 = dtheta1.eval_on(ws, &cf.reeb, &cf.z1);
    let b_t1b = dtheta1.eval_on(ws, &cf.reeb, &z1b);
    let b_11b = dtheta1.eval_on(ws, &cf.z1, &z1b);

    // ω(T) = −dθ¹(T, Z₁); pure imaginary up to the admissibility defect
    let minus_bt1 = b_t1.neg();
    let omega_reality = minus_bt1.add(&minus_bt1.conj()).l2_norm();
    let omega_t = minus_bt1.sub(&minus_bt1.conj()).scale(C::new(0.5, 0.0));
    let omega_z1b = b_11b.clone();
    let omega_z1 = b_11b.conj().neg();
    let a11 = b_t1b.conj();

    let omega = cf
        .theta
        .scale_field(ws, &omega_t)
        .add(&cf.theta1.scale_field(ws, &omega_z1))
        .add(&cf.theta1_bar().scale_field(ws, &omega_z1b));

    // R is the θ¹∧θ¹̄ coefficient of dω₁¹ (curvature expansion)
    let domega = omega.d(ws);
    let r_raw = domega.eval_on(ws, &cf.z1, &z1b);
    let r_reality = r_raw.reality_defect();
    let r = r_raw.re();

    let tau_term = wedge(ws, &cf.theta, &cf.theta1_bar()).scale_field(ws, &a11.conj());
    let resub = dtheta1.sub(&wedge(ws, &cf.theta1, &omega)).sub(&tau_term);

    Ok(StructureData {
        coframe: cf.clone(),
        omega,
        omega_t,
        omega_z1,
        omega_z1b,
        a11,
        r,
        residuals: StructureResiduals {
            resubstitution: resub.l2_norm(),
            omega_reality,
            r_reality,
            coframe: report,
        },
    })
}

/// Convenience: build a model and solve its structure.
pub fn model_structure(
    ws: &Workspace,
    spec: &ModelSpec,
    opts: &SolveOptions,
) -> Result<StructureData> {
    let cf = build_model(ws, spec, opts)?;
    solve_structure(ws, &cf, opts)
}

/// Pseudo-Einstein tensor `W₁ = R,₁ − i A₁₁,₁̄` (weight 1).
pub fn w1(ws: &Workspace, sd: &StructureData) -> Weighted {
    let r1 = cov(ws, sd, &Weighted::scalar(sd.r.clone()), Dir::Z1);
    let a_1b = cov(ws, sd, &Weighted::new(sd.a11.clone(), 2), Dir::Z1bar);
    Weighted::new(r1.value.sub(&a_1b.value.scale(I)), 1)
}

/// CR Q-curvature, computed along both displayed routes; returns the field
/// together with the route disagreement.
pub fn q_curvature(ws: &Workspace, sd: &StructureData) -> (Field, Scalar) {
    // route 1: −Re(R,₁₁̄ − i A₁₁,₁̄₁̄)
    let r_11b = cov(
        ws,
        sd,
        &cov(ws, sd, &Weighted::scalar(sd.r.clone()), Dir::Z1),
        Dir::Z1bar,
    );
    let a = Weighted::new(sd.a11.clone(), 2);
    let a_1b1b = cov(ws, sd, &cov(ws, sd, &a, Dir::Z1bar), Dir::Z1bar);
    let q1 = r_11b.value.sub(&a_1b1b.value.scale(I)).re().neg();
    // route 2: −(1/2)[Δ_b R − i(A₁₁,₁̄₁̄ − A₁̄₁̄,₁₁)]
    let lap_r = crate::operators::sublaplacian(ws, sd, &sd.r);
    let abar = Weighted::new(sd.a11_bar(), -2);
    let abar_11 = cov(ws, sd, &cov(ws, sd, &abar, Dir::Z1), Dir::Z1);
    let q2 = lap_r
        .sub(&a_1b1b.value.sub(&abar_11.value).scale(I))
        .scale(C::new(-0.5, 0.0));
    let defect = q1.sub(&q2.re()).l2_norm();
    (q1, defect)
}

/// Cartan tensor `Q₁₁ = (1/6) R,₁₁ + (i/2) R A₁₁ − A₁₁,₀ − (2i/3) A₁₁,₁̄₁`
/// (weight 2); vanishing identically characterizes spherical structures.
pub fn cartan_tensor(ws: &Workspace, sd: &StructureData) -> Weighted {
    let r_11 = cov(
        ws,
        sd,
        &cov(ws, sd, &Weighted::scalar(sd.r.clone()), Dir::Z1),
        Dir::Z1,
    );
    let a = Weighted::new(sd.a11.clone(), 2);
    let a_0 = cov(ws, sd, &a, Dir::T);
    let a_1b1 = cov(ws, sd, &cov(ws, sd, &a, Dir::Z1bar), Dir::Z1);
    let value = r_11
        .value
        .scale(C::new(1.0 / 6.0, 0.0))
        .add(&ws.mul(&sd.r, &sd.a11).scale(I * 0.5))
        .sub(&a_0.value)
        .sub(&a_1b1.value.scale(I * (2.0 / 3.0)));
    Weighted::new(value, 2)
}

/// Closedness identity behind the pseudo-Einstein definition:
/// `d(ω₁¹ + iRθ) = i[W₁ θ¹ + W̄₁ θ¹̄] ∧ θ`. Returns the L² residual.
pub fn check_lemma_l1(ws: &Workspace, sd: &StructureData) -> Scalar {
    let form = sd
        .omega
        .add(&sd.coframe.theta.scale_field(ws, &sd.r).scale(I));
    let lhs = form.d(ws);
    let w = w1(ws, sd);
    let wform = sd
        .coframe
        .theta1
        .scale_field(ws, &w.value)
        .add(&sd.coframe.theta1_bar().scale_field(ws, &w.value.conj()));
    let rhs = wedge(ws, &wform, &sd.coframe.theta).scale(I);
    lhs.sub(&rhs).l2_norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators;

    fn ws() -> Workspace {
        Workspace::new(12, 7).unwrap()
    }

    #[test]
    fn sphere_structure_goldens() {
        let ws = ws();
        let sd = model_structure(&ws, &ModelSpec::Sphere, &SolveOptions::default()).unwrap();
        // A₁₁ = 0 exactly (Sasakian), R = 2 constant, ω₁¹ = −2iθ
        assert!(
            sd.norm_w(&ws, &sd.a11) < 1e-12,
            "|A11| = {}",
            sd.norm_w(&ws, &sd.a11)
        );
        let dev = sd.r.sub(&Field::real_constant(crate::SPHERE_R));
        assert!(dev.l2_norm() < 1e-12, "R deviation {}", dev.l2_norm());
        assert!(sd.omega_t.sub(&Field::constant(-2.0 * I)).l2_norm() < 1e-12);
        assert!(sd.omega_z1.is_empty() && sd.omega_z1b.is_empty());
        assert!(sd.residuals.resubstitution < 1e-12);
        assert!(sd.residuals.coframe.admissibility_l2 < 1e-14);
    }

    #[test]
    fn left_invariant_degenerates_to_sphere_at_one() {
        let ws = ws();
        let sd = model_structure(
            &ws,
            &ModelSpec::LeftInvariant { a: 1.0 },
            &SolveOptions::default(),
        )
        .unwrap();
        assert!(sd.norm_w(&ws, &sd.a11) < 1e-12);
        assert!(sd.r.sub(&Field::real_constant(2.0)).l2_norm() < 1e-12);
    }

    #[test]
    fn left_invariant_matches_golden_constants() {
        let ws = ws();
        for a in [0.9, 0.99, 1.01, 1.1, 1.3] {
            let sd = model_structure(
                &ws,
                &ModelSpec::LeftInvariant { a },
                &SolveOptions::default(),
            )
            .unwrap();
            let r_dev = sd.r.sub(&Field::real_constant(left_invariant_golden::r(a)));
            assert!(r_dev.l2_norm() < 1e-10, "a={a} R dev {}", r_dev.l2_norm());
            let a_dev = sd.a11.sub(&Field::constant(left_invariant_golden::a11(a)));
            assert!(a_dev.l2_norm() < 1e-10, "a={a} A dev {}", a_dev.l2_norm());
            assert!(sd.residuals.resubstitution < 1e-10);
        }
        // |A₁₁(a)| → 0 monotonically as a → 1
        let norms: Vec<f64> = [1.1, 1.01, 1.001]
            .iter()
            .map(|a| left_invariant_golden::a11(*a).norm())
            .collect();
        assert!(norms[0] > norms[1] && norms[1] > norms[2]);
    }

    #[test]
    fn reeb_examples() {
        let ws = ws();
        // reference structure: T itself
        let rep = reeb(&ws, &OneForm::theta_ref()).unwrap();
        assert!(rep.normalization_residual < 1e-10);
        assert!(rep.contraction_residual < 1e-10);
        assert!(rep.vector.t.sub(&Field::one()).l2_norm() < 1e-8);
        // constant rescale: θ̃ = 2θ ⇒ T̃ = T/2
        let rep2 = reeb(&ws, &OneForm::theta_ref().scale(C::new(2.0, 0.0))).unwrap();
        assert!(rep2.vector.t.sub(&Field::real_constant(0.5)).l2_norm() < 1e-8);
        assert!(rep2.normalization_residual < 1e-10);
        // polynomial positive rescale
        let lam = crate::sampling::named_exponent("re_zwbar")
            .unwrap()
            .scale(C::new(0.1, 0.0));
        let phi = exp_series(&lam.scale(C::new(2.0, 0.0)), 12, ws.cap());
        let rep3 = reeb(&ws, &OneForm::theta_ref().scale_field(&ws, &phi)).unwrap();
        assert!(
            rep3.normalization_residual < 1e-8,
            "{}",
            rep3.normalization_residual
        );
        assert!(
            rep3.contraction_residual < 1e-8,
            "{}",
            rep3.contraction_residual
        );
        // cross-check against the closed-form dual frame of the rescale
        let cf =
            rescale_with_lambda(&ws, &sphere_coframe(), &lam, &SolveOptions::default()).unwrap();
        let diff =
            cf.reeb.t.sub(&rep3.vector.t).l2_norm() + cf.reeb.z1.sub(&rep3.vector.z1).l2_norm();
        assert!(diff < 1e-7, "reeb mismatch {diff}");
    }

    #[test]
    fn conformal_rescale_identity_and_constant() {
        let ws = ws();
        let opts = SolveOptions::default();
        // Φ = 1: identical coframe
        let cf = conformal_rescale(&ws, &sphere_coframe(), &Field::one(), &opts).unwrap();
        assert!(cf.theta1.sub(&OneForm::theta1_ref()).l2_norm() < 1e-9);
        // Φ = k: θ̃¹ = √k θ¹, no correction term
        let cf2 =
            conformal_rescale(&ws, &sphere_coframe(), &Field::real_constant(4.0), &opts).unwrap();
        assert!(cf2.theta1.p.sub(&Field::real_constant(2.0)).l2_norm() < 1e-8);
        assert!(cf2.theta1.t.l2_norm() < 1e-8);
    }

    #[test]
    fn perturbed_sphere_admissibility_and_correction() {
        let ws = ws();
        let opts = SolveOptions::default();
        let lam = crate::sampling::named_exponent("re_zwbar")
            .unwrap()
            .scale(C::new(0.1, 0.0));
        let cf = rescale_with_lambda(&ws, &sphere_coframe(), &lam, &opts).unwrap();
        let rep = cf.validate(&ws);
        assert!(
            rep.admissibility_l2 < 1e-7,
            "admissibility {}",
            rep.admissibility_l2
        );
        assert!(rep.duality < 1e-9, "duality {}", rep.duality);
        // the recovered correction is c = 2i λ,₁̄: check via θ̃¹(T-part)
        let c_analytic = lam.frame_derive(Dir::Z1bar).scale(2.0 * I);
        let sqrt_phi = exp_series(&lam, 12, ws.cap());
        let expected_t = ws.mul(&sqrt_phi, &c_analytic);
        assert!(cf.theta1.t.sub(&expected_t).l2_norm() < 1e-9);
        // volume weight is Φ²
        let phi2 = exp_series(&lam.scale(C::new(4.0, 0.0)), 12, ws.cap());
        assert!(cf.vol_weight.sub(&phi2).l2_norm() < 1e-9);
    }

    #[test]
    fn perturbed_structure_solves_with_small_residuals() {
        let ws = ws();
        let opts = SolveOptions::default();
        let sd = model_structure(
            &ws,
            &ModelSpec::Perturbed {
                base: None,
                eps: 0.1,
                g: ExponentSpec::Named("re_zwbar".into()),
            },
            &opts,
        )
        .unwrap();
        assert!(
            sd.residuals.resubstitution < 1e-6,
            "resub {}",
            sd.residuals.resubstitution
        );
        assert!(sd.residuals.omega_reality < 1e-7);
        assert!(sd.residuals.r_reality < 1e-7);
        // torsion is genuinely nonzero (O(ε)) and R is near 2
        assert!(sd.norm_w(&ws, &sd.a11) > 1e-3);
        let mean_r = sd.integrate_w(&ws, &sd.r).re / sd.integrate_w(&ws, &Field::one()).re;
        assert!((mean_r - 2.0).abs() < 0.2, "mean R {mean_r}");
    }

    #[test]
    fn curvature_quantities_on_models() {
        let ws = ws();
        let opts = SolveOptions::default();
        // sphere: W₁ = 0, Q = 0, Q₁₁ = 0
        let sph = model_structure(&ws, &ModelSpec::Sphere, &opts).unwrap();
        assert!(w1(&ws, &sph).value.l2_norm() < 1e-12);
        let (q, defect) = q_curvature(&ws, &sph);
        assert!(q.l2_norm() < 1e-12 && defect < 1e-12);
        assert!(cartan_tensor(&ws, &sph).value.l2_norm() < 1e-12);
        assert!(check_lemma_l1(&ws, &sph) < 1e-10);

        // left-invariant: W₁ = 0, Q = 0, Q₁₁ = (3/2)(a⁴ − a⁻⁴)
        for a in [1.1_f64, 0.9] {
            let li = model_structure(&ws, &ModelSpec::LeftInvariant { a }, &opts).unwrap();
            assert!(w1(&ws, &li).value.l2_norm() < 1e-10);
            let (q, defect) = q_curvature(&ws, &li);
            assert!(q.l2_norm() < 1e-10 && defect < 1e-10);
            let q11 = cartan_tensor(&ws, &li).value;
            let dev = q11.sub(&Field::real_constant(left_invariant_golden::q11(a)));
            assert!(dev.l2_norm() < 1e-9, "a={a} Q11 dev {}", dev.l2_norm());
            assert!(check_lemma_l1(&ws, &li) < 1e-9);
        }
    }

    #[test]
    fn r_route_agreement() {
        let ws = ws();
        let opts = SolveOptions::default();
        for spec in [
            ModelSpec::Sphere,
            ModelSpec::LeftInvariant { a: 1.2 },
            ModelSpec::Perturbed {
                base: None,
                eps: 0.1,
                g: ExponentSpec::Named("re_zwbar".into()),
            },
        ] {
            let sd = model_structure(&ws, &spec, &opts).unwrap();
            let r2 = operators::r_via_commutation(&ws, &sd);
            let dev = sd.r.sub(&r2).l2_norm();
            let tol = if matches!(spec, ModelSpec::Perturbed { .. }) {
                1e-6
            } else {
                1e-10
            };
            assert!(dev < tol, "{}: R route disagreement {dev}", spec.label());
        }
    }

    #[test]
    fn rescale_composition_invariants() {
        let ws = ws();
        let opts = SolveOptions::default();
        let l1 = crate::sampling::named_exponent("re_zwbar")
            .unwrap()
            .scale(C::new(0.05, 0.0));
        let l2 = crate::sampling::named_exponent("im_zwbar")
            .unwrap()
            .scale(C::new(0.04, 0.0));
        let once = rescale_with_lambda(&ws, &sphere_coframe(), &l1.add(&l2), &opts).unwrap();
        let step1 = rescale_with_lambda(&ws, &sphere_coframe(), &l1, &opts).unwrap();
        let step2 = rescale_with_lambda(&ws, &step1, &l2, &opts).unwrap();
        let sd_once = solve_structure(&ws, &once, &opts).unwrap();
        let sd_seq = solve_structure(&ws, &step2, &opts).unwrap();
        // frame scalars agree up to gauge: R, Q, |A₁₁|, ‖W₁‖, ‖Q₁₁‖
        assert!(sd_once.r.sub(&sd_seq.r).l2_norm() < 1e-6);
        let a_once = ws.mul(&sd_once.a11, &sd_once.a11_bar());
        let a_seq = ws.mul(&sd_seq.a11, &sd_seq.a11_bar());
        assert!(a_once.sub(&a_seq).l2_norm() < 1e-6);
        let (q_once, _) = q_curvature(&ws, &sd_once);
        let (q_seq, _) = q_curvature(&ws, &sd_seq);
        assert!(q_once.sub(&q_seq).l2_norm() < 1e-6);
        let w_gap = (w1(&ws, &sd_once).value.l2_norm() - w1(&ws, &sd_seq).value.l2_norm()).abs();
        assert!(w_gap < 1e-6);
        let c_gap = (cartan_tensor(&ws, &sd_once).value.l2_norm()
            - cartan_tensor(&ws, &sd_seq).value.l2_norm())
        .abs();
        assert!(c_gap < 1e-6);
    }

    #[test]
    fn cartan_tensor_vanishes_on_perturbed_sphere() {
        // sphericality is CR invariant: strong integration test of the stack
        let ws = ws();
        let opts = SolveOptions::default();
        let sd = model_structure(
            &ws,
            &ModelSpec::Perturbed {
                base: None,
                eps: 0.1,
                g: ExponentSpec::Named("re_zwbar".into()),
            },
            &opts,
        )
        .unwrap();
        let q11 = cartan_tensor(&ws, &sd).value;
        assert!(q11.l2_norm() < 1e-6, "‖Q₁₁‖ = {}", q11.l2_norm());
        assert!(check_lemma_l1(&ws, &sd) < 1e-6);
    }

    #[test]
    fn non_admissible_coframe_rejected() {
        let ws = ws();
        let mut cf = sphere_coframe();
        cf.theta1 = cf.theta1.scale(C::new(1.3, 0.0));
        assert!(matches!(
            solve_structure(&ws, &cf, &SolveOptions::default()),
            Err(crate::Error::NonAdmissible { .. })
        ));
    }
}
