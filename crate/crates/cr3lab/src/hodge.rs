//! The Chern-class potential `σ`, the Kohn decomposition of a (0,1)-form
//! and the pseudo-Einstein construction pipeline.
//!
//! On every model here `c₁(T₁,₀M) = 0` holds trivially and the connection
//! form itself is a global pure-imaginary primitive: `σ = ω₁¹` satisfies
//! `dσ = dω₁¹` on the nose (the structure solver enforces
//! `ω₁¹ + ω̄₁¹ = 0`). The decomposition `σ₁̄ θ¹̄ = ∂̄_b φ + γ` with
//! `γ ∈ ker ∂̄_b*` is a finite-dimensional least squares over the truncated
//! function space; at truncation `N` the harmonic space is spanned by the
//! conjugates of CR functions, which is what the orthogonality of the normal
//! equations enforces.

use crate::field::{Dir, Field};
use crate::forms::OneForm;
use crate::mono::canonical_basis;
use crate::operators::{cov, dbar_star, p0, p1, Weighted, ZeroOneForm};
use crate::structures::{
    rescale_with_lambda, solve_structure, w1, Coframe, SolveOptions, StructureData,
};
use crate::workspace::Workspace;
use crate::{Error, Result, Scalar, C, I};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

/// Pure imaginary 1-form `σ = σ₁̄ θ¹̄ − σ₁ θ¹ + i σ₀ θ` (components over the
/// structure's own coframe; `σ₁ = conj(σ₁̄)` is implied).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PureImaginaryOneForm {
    pub s1b: Field,
    /// Real field `σ₀`.
    pub s0: Field,
}

impl PureImaginaryOneForm {
    pub fn s1(&self) -> Field {
        self.s1b.conj()
    }

    /// The form over the reference coframe.
    pub fn as_one_form(&self, ws: &Workspace, cf: &Coframe) -> OneForm {
        cf.theta1_bar()
            .scale_field(ws, &self.s1b)
            .sub(&cf.theta1.scale_field(ws, &self.s1()))
            .add(&cf.theta.scale_field(ws, &self.s0).scale(I))
    }

    /// Gauge shift `σ ↦ σ + i dh` for a real field `h` (stays pure
    /// imaginary; `dσ` is unchanged).
    pub fn gauge_shift(&self, ws: &Workspace, sd: &StructureData, h: &Field) -> Self {
        let s = Weighted::scalar(h.re());
        PureImaginaryOneForm {
            s1b: self.s1b.add(&cov(ws, sd, &s, Dir::Z1bar).value.scale(I)),
            s0: self.s0.add(&cov(ws, sd, &s, Dir::T).value),
        }
    }
}

/// Result of `construct_sigma`: the potential and its defining residual.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SigmaReport {
    pub sigma: PureImaginaryOneForm,
    /// `‖dσ − dω₁¹‖` over the reference coframe.
    pub d_residual: Scalar,
    /// Antihermitian defect of the assembled form (pure-imaginary check).
    pub form_defect: Scalar,
}

/// Builds a pure imaginary primitive of `dω₁¹`.
///
/// Seeded by `σ = ω₁¹` itself (which restricts to `σ = −i R₀ θ` on the round
/// sphere); a least-squares polish over constant-coefficient pure-imaginary
/// forms is applied when the seed leaves a residual, and `NoPrimitive` is
/// returned if the tolerance still cannot be met.
pub fn construct_sigma(ws: &Workspace, sd: &StructureData, tol: Scalar) -> Result<SigmaReport> {
    // ω₁¹ is pure imaginary as a form, so its frame components already have
    // the σ shape: σ₁̄ = ω(Z̃₁̄), −σ₁ = ω(Z̃₁), iσ₀ = ω(T̃)
    let sigma = PureImaginaryOneForm {
        s1b: sd.omega_z1b.clone(),
        s0: sd.omega_t.scale(-I).re(),
    };
    let report = sigma_residual(ws, sd, &sigma);
    if report.d_residual <= tol {
        return Ok(report);
    }
    let polished = polish_sigma_constants(ws, sd, &sigma);
    let report = sigma_residual(ws, sd, &polished);
    if report.d_residual <= tol {
        Ok(report)
    } else {
        Err(Error::NoPrimitive {
            residual: report.d_residual,
        })
    }
}

pub fn sigma_residual(
    ws: &Workspace,
    sd: &StructureData,
    sigma: &PureImaginaryOneForm,
) -> SigmaReport {
    let form = sigma.as_one_form(ws, &sd.coframe);
    let d_residual = form.d(ws).sub(&sd.omega.d(ws)).l2_norm();
    SigmaReport {
        sigma: sigma.clone(),
        d_residual,
        form_defect: form.antihermitian_defect(),
    }
}

/// Least-squares correction of `σ` over the 3-real-dimensional space of
/// constant-coefficient pure-imaginary forms (enough for the left-invariant
/// models, where `dω₁¹` has constant coefficients).
pub fn polish_sigma_constants(
    ws: &Workspace,
    sd: &StructureData,
    seed: &PureImaginaryOneForm,
) -> PureImaginaryOneForm {
    let target = sd.omega.d(ws).sub(&seed.as_one_form(ws, &sd.coframe).d(ws));
    let candidates = [
        PureImaginaryOneForm {
            s1b: Field::one(),
            s0: Field::zero(),
        },
        PureImaginaryOneForm {
            s1b: Field::constant(I),
            s0: Field::zero(),
        },
        PureImaginaryOneForm {
            s1b: Field::zero(),
            s0: Field::one(),
        },
    ];
    let cap_basis = canonical_basis(ws.cap());
    let dim = cap_basis.len();
    let stack = |f: &crate::forms::TwoForm| {
        let mut v = DVector::<Scalar>::zeros(6 * dim);
        for (k, comp) in [&f.tp, &f.tm, &f.pm].into_iter().enumerate() {
            for (i, m) in cap_basis.iter().enumerate() {
                let c = comp.coeff(m);
                v[2 * k * dim + i] = c.re;
                v[(2 * k + 1) * dim + i] = c.im;
            }
        }
        v
    };
    let mut a = DMatrix::<Scalar>::zeros(6 * dim, 3);
    for (j, cand) in candidates.iter().enumerate() {
        a.set_column(j, &stack(&cand.as_one_form(ws, &sd.coframe).d(ws)));
    }
    let b = stack(&target);
    let x = a
        .svd(true, true)
        .solve(&b, 1e-13)
        .unwrap_or_else(|_| DVector::zeros(3));
    PureImaginaryOneForm {
        s1b: seed.s1b.add(&Field::constant(C::new(x[0], x[1]))),
        s0: seed.s0.add(&Field::real_constant(x[2])),
    }
}

/// Residuals of the two component equations tying `σ` to the curvature:
/// `R = σ₁̄,₁ + σ₁,₁̄ − σ₀` and `A₁₁,₁̄ = σ₁,₀ + i σ₀,₁ − A₁₁ σ₁̄`.
pub fn verify_sigma(
    ws: &Workspace,
    sd: &StructureData,
    sigma: &PureImaginaryOneForm,
) -> (Scalar, Scalar) {
    let s1b = Weighted::new(sigma.s1b.clone(), -1);
    let s1 = Weighted::new(sigma.s1(), 1);
    let s0 = Weighted::scalar(sigma.s0.clone());
    let r_rhs = cov(ws, sd, &s1b, Dir::Z1)
        .value
        .add(&cov(ws, sd, &s1, Dir::Z1bar).value)
        .sub(&sigma.s0);
    let res1 = sd.norm_w(ws, &sd.r.sub(&r_rhs));
    let a_lhs = cov(ws, sd, &Weighted::new(sd.a11.clone(), 2), Dir::Z1bar).value;
    let a_rhs = cov(ws, sd, &s1, Dir::T)
        .value
        .add(&cov(ws, sd, &s0, Dir::Z1).value.scale(I))
        .sub(&ws.mul(&sd.a11, &sigma.s1b));
    let res2 = sd.norm_w(ws, &a_lhs.sub(&a_rhs));
    (res1, res2)
}

/// The triple realizing the Kohn splitting `η = ∂̄_b φ + γ`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KohnDecomposition {
    /// `φ = u + iv`.
    pub phi: Field,
    pub gamma: ZeroOneForm,
    /// `‖η − ∂̄_b φ − γ‖` (zero by construction; kept for the record).
    pub residual: Scalar,
    /// `‖∂̄_b* γ‖ = ‖γ₁̄,₁‖` — membership of `γ` in the harmonic space.
    pub harmonic_residual: Scalar,
    /// `|⟨∂̄_b φ, γ⟩|` — orthogonality enforced by the normal equations.
    pub orthogonality: Scalar,
    /// Least-squares misfit `‖η − ∂̄_b φ‖ = ‖γ‖`.
    pub gamma_norm: Scalar,
}

impl KohnDecomposition {
    pub fn u(&self) -> Field {
        self.phi.re()
    }

    pub fn v(&self) -> Field {
        self.phi.im()
    }
}

/// Weighted Gram matrix over the canonical basis of degree `≤ n` for the
/// structure's volume form (Hermitian positive definite).
fn weighted_gram(ws: &Workspace, sd: &StructureData, n: usize) -> DMatrix<C> {
    let basis = canonical_basis(n);
    let dim = basis.len();
    let mut g = DMatrix::<C>::zeros(dim, dim);
    let _ = ws;
    for i in 0..dim {
        let ei_w = Field::monomial(basis[i], C::new(1.0, 0.0)).mul(&sd.coframe.vol_weight);
        for j in 0..=i {
            let ej_conj = Field::monomial(basis[j].conj(), C::new(1.0, 0.0));
            let v = crate::field::integrate_product(&ei_w, &ej_conj);
            g[(i, j)] = v;
            g[(j, i)] = v.conj();
        }
    }
    g
}

/// Kohn decomposition of a (0,1)-form by least squares over functions of
/// degree `≤ n`: minimizes `‖η − ∂̄_b φ‖` in the structure's `L²` norm and
/// returns `γ = η − ∂̄_b φ` (minimum-norm `φ`; the CR functions span the
/// null directions).
pub fn kohn_decompose(
    ws: &Workspace,
    sd: &StructureData,
    eta: &ZeroOneForm,
    n: usize,
) -> Result<KohnDecomposition> {
    let fun_basis = canonical_basis(n);
    let coef_basis = canonical_basis(ws.cap());
    let rows = coef_basis.len();
    let cols = fun_basis.len();
    let mut a = DMatrix::<C>::zeros(rows, cols);
    for (j, m) in fun_basis.iter().enumerate() {
        let e = Field::monomial(*m, C::new(1.0, 0.0));
        let de = cov(ws, sd, &Weighted::scalar(e), Dir::Z1bar).value;
        for (i, mm) in coef_basis.iter().enumerate() {
            a[(i, j)] = de.coeff(mm);
        }
    }
    let b = DVector::<C>::from_iterator(rows, coef_basis.iter().map(|m| eta.g1b.coeff(m)));
    let gram = weighted_gram(ws, sd, ws.cap());
    let chol = gram.cholesky().ok_or(Error::IllConditioned {
        cond: Scalar::INFINITY,
        limit: 1e12,
    })?;
    // ‖x‖_G = ‖Lᴴ x‖₂: weight the rows by Lᴴ before the min-norm solve
    let lh = chol.l().adjoint();
    let aw = &lh * &a;
    let bw = &lh * &b;
    let svd = aw.svd(true, true);
    let smax = svd.singular_values.max();
    let phi_vec = svd
        .solve(&bw, smax * 1e-12)
        .map_err(|_| Error::IllConditioned {
            cond: Scalar::INFINITY,
            limit: 1e12,
        })?;
    let phi = Field::from_vector(&fun_basis, phi_vec.as_slice());
    let dphi = cov(ws, sd, &Weighted::scalar(phi.clone()), Dir::Z1bar).value;
    let gamma = ZeroOneForm::new(eta.g1b.sub(&dphi));
    let harmonic_residual = sd.norm_w(ws, &dbar_star(ws, sd, &gamma));
    let orthogonality = sd.inner_w(ws, &dphi, &gamma.g1b).norm();
    Ok(KohnDecomposition {
        phi,
        residual: 0.0,
        harmonic_residual,
        orthogonality,
        gamma_norm: sd.norm_w(ws, &gamma.g1b),
        gamma,
    })
}

/// Runs the decomposition on `η = σ₁̄ θ¹̄` for the structure's own `σ`.
pub fn decompose_sigma(
    ws: &Workspace,
    sd: &StructureData,
    sigma: &PureImaginaryOneForm,
    n: usize,
) -> Result<KohnDecomposition> {
    kohn_decompose(ws, sd, &ZeroOneForm::new(sigma.s1b.clone()), n)
}

/// Residual of the pseudo-Einstein expression
/// `W₁ = 2 P₁ u + i(A₁₁ γ₁̄ − γ₁,₀)`.
pub fn check_w1_identity(ws: &Workspace, sd: &StructureData, dec: &KohnDecomposition) -> Scalar {
    let w = w1(ws, sd).value;
    let p1u = p1(ws, sd, &dec.u()).value;
    let gamma1 = Weighted::new(dec.gamma.g1(), 1);
    let gamma10 = cov(ws, sd, &gamma1, Dir::T).value;
    let torsion_part = ws.mul(&sd.a11, &dec.gamma.g1b).sub(&gamma10);
    let rhs = p1u.scale(C::new(2.0, 0.0)).add(&torsion_part.scale(I));
    sd.norm_w(ws, &w.sub(&rhs))
}

/// Pseudo-Einstein candidate `θ̃ = e^{(f+2u)/3} θ` (so `λ = (f+2u)/6` in the
/// `e^{2λ}` convention): rescale, re-solve the structure, report `‖W̃₁‖`.
pub struct PeCandidate {
    pub coframe: Coframe,
    pub structure: StructureData,
    pub w1_norm: Scalar,
    /// Residual of the defining equation `P₁ f = i(A₁₁ γ₁̄ − γ₁,₀)` on the
    /// base structure.
    pub eq7_residual: Scalar,
}

pub fn pe_candidate(
    ws: &Workspace,
    sd: &StructureData,
    dec: &KohnDecomposition,
    f: &Field,
    opts: &SolveOptions,
) -> Result<PeCandidate> {
    let lambda = f
        .add(&dec.u().scale(C::new(2.0, 0.0)))
        .scale(C::new(1.0 / 6.0, 0.0))
        .re();
    let cf = rescale_with_lambda(ws, &sd.coframe, &lambda, opts)?;
    let tilde = solve_structure(ws, &cf, opts)?;
    let w1_norm = tilde.norm_w(ws, &w1(ws, &tilde).value);
    let p1f = p1(ws, sd, f).value;
    let gamma1 = Weighted::new(dec.gamma.g1(), 1);
    let gamma10 = cov(ws, sd, &gamma1, Dir::T).value;
    let rhs = ws.mul(&sd.a11, &dec.gamma.g1b).sub(&gamma10).scale(I);
    let eq7_residual = sd.norm_w(ws, &p1f.sub(&rhs));
    Ok(PeCandidate {
        coframe: cf,
        structure: tilde,
        w1_norm,
        eq7_residual,
    })
}

/// Fourth-order consequence of the defining equation:
/// `P₀ f = 2i[(A₁₁ γ₁̄),₁̄ − (A₁̄₁̄ γ₁),₁]`. Errors if the third-order
/// equation does not already hold within `delta`.
pub fn check_eq24(
    ws: &Workspace,
    sd: &StructureData,
    dec: &KohnDecomposition,
    f: &Field,
    delta: Scalar,
) -> Result<Scalar> {
    let p1f = p1(ws, sd, f).value;
    let gamma1 = Weighted::new(dec.gamma.g1(), 1);
    let gamma10 = cov(ws, sd, &gamma1, Dir::T).value;
    let pre = sd.norm_w(
        ws,
        &p1f.sub(&ws.mul(&sd.a11, &dec.gamma.g1b).sub(&gamma10).scale(I)),
    );
    if pre > delta {
        return Err(Error::PreconditionViolated {
            what: "third-order pseudo-Einstein equation",
            residual: pre,
            tol: delta,
        });
    }
    let ag = Weighted::new(ws.mul(&sd.a11, &dec.gamma.g1b), 1);
    let abg = Weighted::new(ws.mul(&sd.a11_bar(), &dec.gamma.g1()), -1);
    let rhs = cov(ws, sd, &ag, Dir::Z1bar)
        .value
        .sub(&cov(ws, sd, &abg, Dir::Z1).value)
        .scale(2.0 * I);
    Ok(sd.norm_w(ws, &p0(ws, sd, f).sub(&rhs)))
}

/// On Sasakian structures the harmonic part is Reeb-parallel:
/// `γ₁,₀ = 0`, together with `R,₁ = 2u,₁̄₁₁ − iγ₁,₀`. Errors with
/// `NotSasakian` when `‖A₁₁‖` exceeds the tolerance.
pub fn check_torsion_free_gamma(
    ws: &Workspace,
    sd: &StructureData,
    dec: &KohnDecomposition,
    torsion_tol: Scalar,
) -> Result<(Scalar, Scalar)> {
    let a_norm = sd.norm_w(ws, &sd.a11);
    if a_norm > torsion_tol {
        return Err(Error::NotSasakian {
            torsion_norm: a_norm,
        });
    }
    let gamma1 = Weighted::new(dec.gamma.g1(), 1);
    let gamma10 = cov(ws, sd, &gamma1, Dir::T).value;
    let g10_norm = sd.norm_w(ws, &gamma10);
    // eq (8): R,₁ = 2 u,₁̄₁₁ − i γ₁,₀
    let r1 = cov(ws, sd, &Weighted::scalar(sd.r.clone()), Dir::Z1).value;
    let u111 = crate::operators::cov_path(
        ws,
        sd,
        &Weighted::scalar(dec.u()),
        &[Dir::Z1bar, Dir::Z1, Dir::Z1],
    )
    .value;
    let eq8 = sd.norm_w(
        ws,
        &r1.sub(&u111.scale(C::new(2.0, 0.0)).sub(&gamma10.scale(I))),
    );
    Ok((g10_norm, eq8))
}
