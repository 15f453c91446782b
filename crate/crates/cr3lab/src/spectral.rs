//! Galerkin discretization of the CR Paneitz operator over truncated real
//! function spaces: spectra, kernel identification against the
//! CR-pluriharmonic subspace, the essential-positivity constant `Λ` and the
//! eigenvalue upper bound.

use crate::field::Dir;
use crate::field::Field;
use crate::mono::canonical_basis;
use crate::operators::{cov, p0, p1, p1_bar, Weighted};
use crate::structures::StructureData;
use crate::workspace::Workspace;
use crate::{Error, Result, Scalar, C};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

/// Real-valued basis of the degree-`≤ n` function space: the self-conjugate
/// canonical monomials `(w w̄)^b` plus `Re`/`Im` of each conjugate pair.
pub fn real_basis(n: usize) -> Vec<Field> {
    let mut out = Vec::new();
    for m in canonical_basis(n) {
        let mc = m.conj();
        if m == mc {
            out.push(Field::monomial(m, C::new(1.0, 0.0)));
        } else if m < mc {
            let f = Field::monomial(m, C::new(1.0, 0.0));
            out.push(f.re());
            out.push(f.im());
        }
    }
    out
}

/// Galerkin matrices of `P₀` over the real basis.
#[derive(Clone, Debug)]
pub struct OperatorMatrix {
    /// Gram matrix of the basis in the structure's `L²` metric.
    pub g: DMatrix<Scalar>,
    /// `K[i][j] = ∫ (P₀ eᵢ) eⱼ dμ`, symmetrized after the defect check.
    pub k: DMatrix<Scalar>,
    pub n: usize,
    pub dim: usize,
    /// Max entrywise disagreement with the quadratic-form route
    /// `−∫⟨P eᵢ + P̄ eᵢ, d_b eⱼ⟩ dμ`.
    pub eq10_defect: Scalar,
    /// Max entrywise asymmetry before symmetrization.
    pub symmetry_defect: Scalar,
    /// Largest |K| entry (scale for relative defect assessments).
    pub max_entry: Scalar,
}

/// Assembles the Gram and operator matrices; the quadratic form is also
/// built through the pairing with `d_b` as an independent cross-check.
pub fn assemble(ws: &Workspace, sd: &StructureData, n: usize) -> Result<OperatorMatrix> {
    if n > ws.cap() {
        return Err(Error::CapExceeded {
            needed: n,
            cap: ws.cap(),
        });
    }
    let basis = real_basis(n);
    let dim = basis.len();
    let w = &sd.coframe.vol_weight;
    // operator images and weighted pairing partners; measure-level products
    // are exact (integration is terminal, no degree cap applies)
    let mut p0s = Vec::with_capacity(dim);
    let mut p1s = Vec::with_capacity(dim);
    let mut p1bs = Vec::with_capacity(dim);
    let mut we = Vec::with_capacity(dim);
    let mut d1w = Vec::with_capacity(dim);
    let mut d1bw = Vec::with_capacity(dim);
    for e in &basis {
        let p1e = p1(ws, sd, e);
        let p1be = p1_bar(ws, sd, e);
        // P₀ = ∇₁̄P₁ + ∇₁P̄₁ reuses the third-order images
        p0s.push(
            cov(ws, sd, &p1e, Dir::Z1bar)
                .value
                .add(&cov(ws, sd, &p1be, Dir::Z1).value),
        );
        p1s.push(p1e.value);
        p1bs.push(p1be.value);
        we.push(e.mul(w));
        let s = Weighted::scalar(e.clone());
        d1w.push(cov(ws, sd, &s, Dir::Z1).value.mul(w));
        d1bw.push(cov(ws, sd, &s, Dir::Z1bar).value.mul(w));
    }
    let mut g = DMatrix::zeros(dim, dim);
    let mut k = DMatrix::zeros(dim, dim);
    let mut f = DMatrix::zeros(dim, dim);
    for i in 0..dim {
        for j in 0..dim {
            if j <= i {
                g[(i, j)] = crate::field::integrate_product(&we[i], &basis[j]).re;
                g[(j, i)] = g[(i, j)];
            }
            k[(i, j)] = crate::field::integrate_product(&p0s[i], &we[j]).re;
            // eq (10): −∫⟨Peᵢ + P̄eᵢ, d_beⱼ⟩ = −∫[(P₁eᵢ)eⱼ,₁̄ + (P̄₁eᵢ)eⱼ,₁]
            f[(i, j)] = -(crate::field::integrate_product(&p1s[i], &d1bw[j]).re
                + crate::field::integrate_product(&p1bs[i], &d1w[j]).re);
        }
    }
    let mut eq10_defect: Scalar = 0.0;
    let mut symmetry_defect: Scalar = 0.0;
    for i in 0..dim {
        for j in 0..dim {
            eq10_defect = eq10_defect.max((k[(i, j)] - f[(i, j)]).abs());
            symmetry_defect = symmetry_defect.max((k[(i, j)] - k[(j, i)]).abs());
        }
    }
    let max_entry = k.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    let k = (k.clone() + k.transpose()) * 0.5;
    Ok(OperatorMatrix {
        g,
        k,
        n,
        dim,
        eq10_defect,
        symmetry_defect,
        max_entry,
    })
}

/// Spectral data of the generalized problem `K v = μ G v`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpectralReport {
    pub n: usize,
    /// Ascending eigenvalues.
    pub eigenvalues: Vec<Scalar>,
    pub kernel_dim: usize,
    /// Smallest eigenvalue above the kernel threshold.
    pub lambda: Scalar,
    pub threshold: Scalar,
    /// Largest |μ| inside the numerical kernel (spectral-gap log).
    pub kernel_ceiling: Scalar,
    /// G-orthonormal eigenvectors, columns sorted with the eigenvalues.
    #[serde(skip)]
    pub vectors: DMatrix<Scalar>,
    /// Minimum eigenvalue of the Gram matrix (conditioning log).
    pub gram_min_eigenvalue: Scalar,
}

/// Cyclic-Jacobi eigendecomposition of a dense symmetric matrix. Written
/// in-crate because the clustered spectra here (exact kernel plus small
/// multiplicities) need a solver whose eigenvalue/eigenvector pairing is
/// unconditionally consistent.
pub fn jacobi_symmetric_eigen(
    mat: &DMatrix<Scalar>,
    max_sweeps: usize,
) -> Result<(Vec<Scalar>, DMatrix<Scalar>)> {
    let n = mat.nrows();
    let mut a = mat.clone();
    let mut q = DMatrix::<Scalar>::identity(n, n);
    let scale = mat.iter().fold(0.0_f64, |m, x| m.max(x.abs())).max(1e-300);
    for _ in 0..max_sweeps {
        let mut off: Scalar = 0.0;
        for p in 0..n {
            for r in (p + 1)..n {
                off = off.max(a[(p, r)].abs());
            }
        }
        if off <= 1e-15 * scale {
            let evals: Vec<Scalar> = (0..n).map(|i| a[(i, i)]).collect();
            return Ok((evals, q));
        }
        for p in 0..n {
            for r in (p + 1)..n {
                let apq = a[(p, r)];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let app = a[(p, p)];
                let aqq = a[(r, r)];
                let tau = (aqq - app) / (2.0 * apq);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, r)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, r)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(r, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(r, k)] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let qkp = q[(k, p)];
                    let qkq = q[(k, r)];
                    q[(k, p)] = c * qkp - s * qkq;
                    q[(k, r)] = s * qkp + c * qkq;
                }
            }
        }
    }
    Err(Error::EigenFailure { dim: n })
}

/// Dense self-adjoint generalized eigensolve via Cholesky reduction.
///
/// `threshold_rel` scales the largest |eigenvalue| to split the numerical
/// kernel from the positive spectrum (default `1e-6`).
pub fn eigensolve(m: &OperatorMatrix, threshold_rel: Scalar) -> Result<SpectralReport> {
    let chol =
        m.g.clone()
            .cholesky()
            .ok_or(Error::EigenFailure { dim: m.dim })?;
    let (g_evals, _) = jacobi_symmetric_eigen(&m.g, 60)?;
    let gram_min = g_evals.iter().copied().fold(Scalar::INFINITY, Scalar::min);
    let l = chol.l();
    let linv = l
        .clone()
        .try_inverse()
        .ok_or(Error::EigenFailure { dim: m.dim })?;
    let reduced = &linv * &m.k * linv.transpose();
    let reduced = (reduced.clone() + reduced.transpose()) * 0.5;
    let (raw_evals, raw_vecs) = jacobi_symmetric_eigen(&reduced, 60)?;
    let mut order: Vec<usize> = (0..m.dim).collect();
    order.sort_by(|&a, &b| raw_evals[a].total_cmp(&raw_evals[b]));
    let eigenvalues: Vec<Scalar> = order.iter().map(|&i| raw_evals[i]).collect();
    let mut vectors = DMatrix::zeros(m.dim, m.dim);
    let back = linv.transpose();
    for (col, &i) in order.iter().enumerate() {
        let v = &back * raw_vecs.column(i);
        vectors.set_column(col, &v);
    }
    let scale = eigenvalues.iter().fold(0.0_f64, |acc, e| acc.max(e.abs()));
    let threshold = threshold_rel * scale.max(1e-300);
    let kernel_dim = eigenvalues.iter().filter(|e| e.abs() <= threshold).count();
    let kernel_ceiling = eigenvalues
        .iter()
        .filter(|e| e.abs() <= threshold)
        .fold(0.0_f64, |acc, e| acc.max(e.abs()));
    let lambda = eigenvalues
        .iter()
        .copied()
        .find(|e| e.abs() > threshold)
        .unwrap_or(0.0);
    Ok(SpectralReport {
        n: m.n,
        eigenvalues,
        kernel_dim,
        lambda,
        threshold,
        kernel_ceiling,
        vectors,
        gram_min_eigenvalue: gram_min,
    })
}

/// Orthonormalized span of `{Re(z^a w^b), Im(z^a w^b) : a + b ≤ n}` — the
/// CR-pluriharmonic polynomials (constant counted once).
pub fn crph_basis(n: usize) -> Vec<Field> {
    let mut out = vec![Field::one()];
    for d in 1..=n as u8 {
        for a in 0..=d {
            let m = crate::mono::Mono::new(a, d - a, 0, 0);
            let f = Field::monomial(m, C::new(1.0, 0.0));
            out.push(f.re());
            out.push(f.im());
        }
    }
    out
}

/// Coordinates of a field in the real basis by a Gram solve; returns the
/// coordinate vector and the projection residual.
pub fn project_to_basis(
    ws: &Workspace,
    sd: &StructureData,
    m: &OperatorMatrix,
    basis: &[Field],
    x: &Field,
) -> (nalgebra::DVector<Scalar>, Scalar) {
    let b = nalgebra::DVector::from_iterator(
        basis.len(),
        basis.iter().map(|e| sd.inner_w(ws, x, e).re),
    );
    let c =
        m.g.clone()
            .cholesky()
            .expect("Gram matrix is positive definite")
            .solve(&b);
    let mut recon = Field::zero();
    for (ci, e) in c.iter().zip(basis) {
        recon = recon.add(&e.scale(C::new(*ci, 0.0)));
    }
    let resid = sd.norm_w(ws, &x.sub(&recon));
    (c, resid)
}

/// Principal angles between two subspaces given by coordinate matrices
/// (columns) in the G-metric.
pub fn principal_angles(
    g: &DMatrix<Scalar>,
    span_a: &DMatrix<Scalar>,
    span_b: &DMatrix<Scalar>,
) -> Vec<Scalar> {
    let chol = g
        .clone()
        .cholesky()
        .expect("Gram matrix is positive definite");
    let l = chol.l();
    let qa = (l.transpose() * span_a).qr().q();
    let qb = (l.transpose() * span_b).qr().q();
    let cross = qa.transpose() * qb;
    let svd = cross.svd(false, false);
    let mut angles: Vec<Scalar> = svd
        .singular_values
        .iter()
        .map(|s| s.min(1.0).acos())
        .collect();
    angles.sort_by(|a, b| b.total_cmp(a));
    angles
}

/// L²-orthogonal split against the numerical kernel of the spectral report.
pub struct PerpDecomposition {
    pub x_ker: Field,
    pub x_perp: Field,
    /// Residual of representing `x` in the trial space.
    pub projection_residual: Scalar,
    /// `⟨x_ker, x_perp⟩` (orthogonality check).
    pub cross_inner: Scalar,
}

pub fn decompose_perp(
    ws: &Workspace,
    sd: &StructureData,
    m: &OperatorMatrix,
    rep: &SpectralReport,
    basis: &[Field],
    x: &Field,
) -> PerpDecomposition {
    let (coords, projection_residual) = project_to_basis(ws, sd, m, basis, x);
    // kernel columns are G-orthonormal: coefficients are ⟨x, vₖ⟩_G
    let mut ker_coords = nalgebra::DVector::<Scalar>::zeros(basis.len());
    let gx = &m.g * &coords;
    for kcol in 0..rep.kernel_dim {
        let v = rep.vectors.column(kcol);
        let c = v.dot(&gx);
        ker_coords += c * v;
    }
    let perp_coords = &coords - &ker_coords;
    let to_field = |v: &nalgebra::DVector<Scalar>| {
        let mut f = Field::zero();
        for (ci, e) in v.iter().zip(basis) {
            f = f.add(&e.scale(C::new(*ci, 0.0)));
        }
        f
    };
    let x_ker = to_field(&ker_coords);
    let x_perp = to_field(&perp_coords);
    let cross_inner = (ker_coords.transpose() * &m.g * &perp_coords)[(0, 0)].abs();
    PerpDecomposition {
        x_ker,
        x_perp,
        projection_residual,
        cross_inner,
    }
}

/// Verdict of the eigenvalue upper bound `Λ² ∫(u⊥)² ≤ ∫(Q⊥)²`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub enum BoundVerdict {
    Holds,
    Violated,
    HypothesisUnmet,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Bound2018H {
    pub lambda: Scalar,
    /// `Λ² ∫(u⊥)²`.
    pub lhs: Scalar,
    /// `∫(Q⊥)²`.
    pub rhs: Scalar,
    pub margin: Scalar,
    /// Residual of the proof chain `∫Q⊥u⊥ + ∫(P₀u⊥)u⊥ = 0`.
    pub chain_residual: Scalar,
    /// The two sides of the Cauchy-Schwarz step
    /// `|∫Q⊥u⊥| ≤ ‖Q⊥‖ ‖u⊥‖`.
    pub cauchy_schwarz: (Scalar, Scalar),
    pub convexity_margin: Scalar,
    pub verdict: BoundVerdict,
}

/// Evaluates the bound for pipeline data `u`, `Q` on a structure satisfying
/// the `(1/2, 1/2)`-convexity hypothesis (checked; reported, not fatal).
pub fn check_bound_2018h(
    ws: &Workspace,
    sd: &StructureData,
    m: &OperatorMatrix,
    rep: &SpectralReport,
    basis: &[Field],
    u: &Field,
    q: &Field,
) -> Bound2018H {
    let (convexity, _) = crate::analysis::structure_convexity(ws, sd, 0.5, 0.5);
    let u_dec = decompose_perp(ws, sd, m, rep, basis, u);
    let q_dec = decompose_perp(ws, sd, m, rep, basis, q);
    bound_from_parts(
        ws,
        sd,
        rep.lambda,
        &u_dec.x_perp,
        &q_dec.x_perp,
        convexity.margin,
    )
}

/// The bound evaluated on explicitly supplied perpendicular parts (also
/// used by the synthetic violation probe).
pub fn bound_from_parts(
    ws: &Workspace,
    sd: &StructureData,
    lambda: Scalar,
    u_perp: &Field,
    q_perp: &Field,
    convexity_margin: Scalar,
) -> Bound2018H {
    let u2 = sd.inner_w(ws, u_perp, u_perp).re;
    let q2 = sd.inner_w(ws, q_perp, q_perp).re;
    let lhs = lambda * lambda * u2;
    let rhs = q2;
    let qu = sd.integrate_pair_w(ws, q_perp, u_perp).re;
    let p0u = sd.integrate_pair_w(ws, &p0(ws, sd, u_perp), u_perp).re;
    let chain_residual = (qu + p0u).abs();
    let verdict = if convexity_margin <= 0.0 {
        BoundVerdict::HypothesisUnmet
    } else if rhs + 1e-10 * (1.0 + lhs) >= lhs {
        BoundVerdict::Holds
    } else {
        BoundVerdict::Violated
    };
    Bound2018H {
        lambda,
        lhs,
        rhs,
        margin: rhs - lhs,
        chain_residual,
        cauchy_schwarz: (qu.abs(), q2.sqrt() * u2.sqrt()),
        convexity_margin,
        verdict,
    }
}
