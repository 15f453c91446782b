//! Workspace: degree cap, sample sets, Gram cache and least-squares
//! projection.

use crate::field::{inner, Field};
use crate::mono::{basis_dim, canonical_basis, Mono};
use crate::points::{random_points, SPoint};
use crate::{Error, Result, Scalar, C};
use nalgebra::{DMatrix, DVector};
use std::cell::RefCell;
use std::collections::HashMap;

/// Hard ceiling on the workspace degree cap (series budget).
pub const MAX_CAP: usize = 24;

/// Shared context for a run: the degree budget, fixed sample sets and the
/// Gram-matrix cache over the canonical basis.
pub struct Workspace {
    cap: usize,
    seed: u64,
    /// 50 validation points used for pointwise residual reports.
    validation: Vec<SPoint>,
    /// Larger point set for least-squares projection.
    projection: Vec<SPoint>,
    grams: RefCell<HashMap<usize, std::rc::Rc<DMatrix<Scalar>>>>,
    /// Cached Vandermonde matrix and normal-equation Cholesky per degree,
    /// for projections from the fixed projection point set.
    vandermonde: RefCell<HashMap<usize, std::rc::Rc<ProjectionCache>>>,
    cond_limit: Scalar,
}

struct ProjectionCache {
    a: DMatrix<C>,
    chol: nalgebra::Cholesky<C, nalgebra::Dyn>,
    /// Condition estimate of the normal equations (power iteration).
    cond: Scalar,
}

impl Workspace {
    pub fn new(cap: usize, seed: u64) -> Result<Self> {
        if cap > MAX_CAP {
            return Err(Error::Config(format!("cap {cap} exceeds {MAX_CAP}")));
        }
        Ok(Workspace {
            cap,
            seed,
            validation: random_points(seed ^ 0x51ab, 50),
            projection: random_points(seed ^ 0x9e37, 2 * basis_dim(cap).max(200)),
            grams: RefCell::new(HashMap::new()),
            vandermonde: RefCell::new(HashMap::new()),
            cond_limit: 1e12,
        })
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn validation_points(&self) -> &[SPoint] {
        &self.validation
    }

    /// Strict product per the module contract: errors with `CapExceeded`
    /// when the degree budget is violated (the caller may retry with a
    /// larger workspace).
    pub fn multiply(&self, x: &Field, y: &Field) -> Result<Field> {
        let needed = x.degree() + y.degree();
        if needed > self.cap {
            return Err(Error::CapExceeded {
                needed,
                cap: self.cap,
            });
        }
        Ok(x.mul(y))
    }

    /// Truncating product used by the solver pipelines; high-degree series
    /// tails are dropped against the documented truncation budget.
    pub fn mul(&self, x: &Field, y: &Field) -> Field {
        x.mul_capped(y, self.cap).0
    }

    pub fn truncate(&self, x: &Field) -> Field {
        x.truncate(self.cap).0
    }

    /// Gram matrix `G[i][j] = ∫ eᵢ ēⱼ dμ₀` over the canonical basis of
    /// degree `≤ n` (real symmetric positive definite).
    pub fn gram(&self, n: usize) -> std::rc::Rc<DMatrix<Scalar>> {
        if let Some(g) = self.grams.borrow().get(&n) {
            return g.clone();
        }
        let basis = canonical_basis(n);
        let dim = basis.len();
        let mut g = DMatrix::zeros(dim, dim);
        for i in 0..dim {
            for j in 0..=i {
                let v = basis[i]
                    .mul(&basis[j].conj())
                    .reduce()
                    .iter()
                    .fold(0.0, |acc, (m, s)| acc + s * m.integral().re);
                g[(i, j)] = v;
                g[(j, i)] = v;
            }
        }
        let rc = std::rc::Rc::new(g);
        self.grams.borrow_mut().insert(n, rc.clone());
        rc
    }

    /// Asserts positive definiteness of the Gram matrix at degree `n` and
    /// returns `(min eigenvalue, condition number)` for logging.
    pub fn gram_conditioning(&self, n: usize) -> Result<(Scalar, Scalar)> {
        let g = self.gram(n);
        let eig = g.as_ref().clone().symmetric_eigen();
        let min = eig.eigenvalues.min();
        let max = eig.eigenvalues.max();
        if min <= 0.0 {
            return Err(Error::IllConditioned {
                cond: Scalar::INFINITY,
                limit: self.cond_limit,
            });
        }
        Ok((min, max / min))
    }

    /// Least-squares best approximation of the sampled values in the
    /// canonical basis of degree `≤ n`.
    ///
    /// Returns `(field, residual, condition number)`, where the residual is
    /// the RMS misfit scaled to an `L²`-norm estimate.
    pub fn project(&self, samples: &[(SPoint, C)], n: usize) -> Result<(Field, Scalar, Scalar)> {
        let basis = canonical_basis(n);
        let dim = basis.len();
        if samples.len() < dim {
            return Err(Error::Config(format!(
                "projection needs at least {dim} samples, got {}",
                samples.len()
            )));
        }
        let mut a = DMatrix::<C>::zeros(samples.len(), dim);
        let mut b = DVector::<C>::zeros(samples.len());
        for (row, (p, v)) in samples.iter().enumerate() {
            b[row] = *v;
            let (zb, wb) = (p.z.conj(), p.w.conj());
            for (col, m) in basis.iter().enumerate() {
                a[(row, col)] = p.z.powi(m.a as i32)
                    * p.w.powi(m.b as i32)
                    * zb.powi(m.c as i32)
                    * wb.powi(m.d as i32);
            }
        }
        let svd = a.clone().svd(true, true);
        let smax = svd.singular_values.max();
        let smin = svd.singular_values.min();
        let cond = if smin > 0.0 {
            smax / smin
        } else {
            Scalar::INFINITY
        };
        if cond > self.cond_limit {
            return Err(Error::IllConditioned {
                cond,
                limit: self.cond_limit,
            });
        }
        let x = svd.solve(&b, 0.0).map_err(|_| Error::IllConditioned {
            cond,
            limit: self.cond_limit,
        })?;
        let resid = (&a * &x - &b).norm() / (samples.len() as Scalar).sqrt() * crate::VOLUME.sqrt();
        let field = Field::from_vector(&basis, x.as_slice());
        Ok((field, resid, cond))
    }

    pub fn projection_points(&self) -> &[SPoint] {
        &self.projection
    }

    fn projection_cache(&self, n: usize) -> Result<std::rc::Rc<ProjectionCache>> {
        if let Some(c) = self.vandermonde.borrow().get(&n) {
            return Ok(c.clone());
        }
        let basis = canonical_basis(n);
        let dim = basis.len();
        let mut a = DMatrix::<C>::zeros(self.projection.len(), dim);
        for (row, p) in self.projection.iter().enumerate() {
            let (zb, wb) = (p.z.conj(), p.w.conj());
            for (col, m) in basis.iter().enumerate() {
                a[(row, col)] = p.z.powi(m.a as i32)
                    * p.w.powi(m.b as i32)
                    * zb.powi(m.c as i32)
                    * wb.powi(m.d as i32);
            }
        }
        let normal = a.adjoint() * &a;
        let cond = hermitian_cond_estimate(&normal);
        if cond > self.cond_limit * self.cond_limit {
            return Err(Error::IllConditioned {
                cond,
                limit: self.cond_limit * self.cond_limit,
            });
        }
        let chol = normal.clone().cholesky().ok_or(Error::IllConditioned {
            cond: Scalar::INFINITY,
            limit: self.cond_limit,
        })?;
        let rc = std::rc::Rc::new(ProjectionCache { a, chol, cond });
        self.vandermonde.borrow_mut().insert(n, rc.clone());
        Ok(rc)
    }

    /// Least-squares projection of values given on the workspace projection
    /// point set, via cached normal equations. Returns
    /// `(field, residual, normal-equation condition estimate)`.
    pub fn project_values(&self, values: &[C], n: usize) -> Result<(Field, Scalar, Scalar)> {
        assert_eq!(values.len(), self.projection.len());
        let cache = self.projection_cache(n)?;
        let b = DVector::<C>::from_column_slice(values);
        let rhs = cache.a.adjoint() * &b;
        let x = cache.chol.solve(&rhs);
        let resid =
            (&cache.a * &x - &b).norm() / (values.len() as Scalar).sqrt() * crate::VOLUME.sqrt();
        let field = Field::from_vector(&canonical_basis(n), x.as_slice());
        Ok((field, resid, cache.cond))
    }

    /// Projects a function given pointwise on the workspace projection set.
    pub fn project_fn(&self, f: impl Fn(SPoint) -> C, n: usize) -> Result<(Field, Scalar, Scalar)> {
        let values: Vec<C> = self.projection.iter().map(|p| f(*p)).collect();
        self.project_values(&values, n)
    }

    /// Canonical basis of degree `≤ n` (delegates to [`mono::canonical_basis`]).
    pub fn basis(&self, n: usize) -> Vec<Mono> {
        canonical_basis(n)
    }
}

/// Weighted Hermitian pairing `∫ f ḡ · weight dμ₀` (the weight carries the
/// volume distortion of non-reference structures).
pub fn inner_weighted(f: &Field, g: &Field, weight: &Field) -> C {
    inner(&f.mul(weight), g)
}

/// Power-iteration estimate of `λ_max / λ_min` for a Hermitian positive
/// definite matrix (inverse iteration through a Cholesky solve).
fn hermitian_cond_estimate(m: &DMatrix<C>) -> Scalar {
    let dim = m.nrows();
    if dim == 0 {
        return 1.0;
    }
    let chol = match m.clone().cholesky() {
        Some(c) => c,
        None => return Scalar::INFINITY,
    };
    let mut v = DVector::<C>::from_element(dim, C::new(1.0, 0.0)).normalize();
    let mut lam_max = 0.0;
    for _ in 0..30 {
        v = (m * &v).normalize();
        lam_max = (m * &v).norm();
    }
    let mut w =
        DVector::<C>::from_fn(dim, |i, _| C::new(1.0 + (i as Scalar).sin(), 0.0)).normalize();
    let mut inv_norm = 0.0;
    for _ in 0..30 {
        w = chol.solve(&w).normalize();
        inv_norm = chol.solve(&w).norm();
    }
    let lam_min = if inv_norm > 0.0 { 1.0 / inv_norm } else { 0.0 };
    if lam_min > 0.0 {
        lam_max / lam_min
    } else {
        Scalar::INFINITY
    }
}
