//! Monomial indices on `S³ ⊂ C²` and their canonical reduction.
//!
//! A monomial `z^a w^b z̄^c w̄^d` is canonical (reduced) when `min(a, c) = 0`;
//! the sphere relation `z z̄ = 1 − w w̄` is applied until this holds. The
//! canonical monomials of total degree `≤ N` form a vector-space basis of the
//! polynomial functions on the sphere, of dimension `Σ_{n≤N} (n+1)²`.

use crate::{Scalar, C, VOLUME};
use serde::{Deserialize, Serialize};

/// Exponents `(a, b, c, d)` of `z^a w^b z̄^c w̄^d`.
#[derive(
    Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default,
)]
pub struct Mono {
    pub a: u8,
    pub b: u8,
    pub c: u8,
    pub d: u8,
}

impl Mono {
    pub const ONE: Mono = Mono {
        a: 0,
        b: 0,
        c: 0,
        d: 0,
    };

    pub fn new(a: u8, b: u8, c: u8, d: u8) -> Self {
        Mono { a, b, c, d }
    }

    pub fn degree(&self) -> usize {
        self.a as usize + self.b as usize + self.c as usize + self.d as usize
    }

    pub fn is_canonical(&self) -> bool {
        self.a == 0 || self.c == 0
    }

    /// Complex conjugate monomial (swaps holomorphic and antiholomorphic
    /// exponents); canonical form is preserved.
    pub fn conj(&self) -> Mono {
        Mono::new(self.c, self.d, self.a, self.b)
    }

    /// Full reduction via `(z z̄)^m = (1 − w w̄)^m` with `m = min(a, c)`.
    ///
    /// Returns the canonical expansion as `(monomial, integer coefficient)`
    /// pairs; the binomial expansion is exact in f64 for the degrees used
    /// here.
    pub fn reduce(&self) -> Vec<(Mono, Scalar)> {
        let m = self.a.min(self.c);
        if m == 0 {
            return vec![(*self, 1.0)];
        }
        let (a, c) = (self.a - m, self.c - m);
        let mut out = Vec::with_capacity(m as usize + 1);
        let mut coeff = 1.0; // (-1)^j * C(m, j)
        for j in 0..=m {
            out.push((Mono::new(a, self.b + j, c, self.d + j), coeff));
            // next binomial term: C(m, j+1) = C(m, j) * (m - j) / (j + 1)
            coeff *= -((m - j) as Scalar) / ((j + 1) as Scalar);
        }
        out
    }

    /// One reduction step `z z̄ → 1 − w w̄` (used by the confluence tests).
    pub fn reduce_once(&self) -> Vec<(Mono, Scalar)> {
        if self.is_canonical() {
            return vec![(*self, 1.0)];
        }
        vec![
            (Mono::new(self.a - 1, self.b, self.c - 1, self.d), 1.0),
            (
                Mono::new(self.a - 1, self.b + 1, self.c - 1, self.d + 1),
                -1.0,
            ),
        ]
    }

    /// Exact integral against the reference volume form `dμ₀ = θ₀ ∧ dθ₀`.
    ///
    /// Zero unless `a = c` and `b = d`; otherwise the Beta-type value
    /// `4π² · a! b! / (a + b + 1)!`.
    pub fn integral(&self) -> C {
        if self.a != self.c || self.b != self.d {
            return C::new(0.0, 0.0);
        }
        C::new(
            VOLUME * factorial(self.a as usize) * factorial(self.b as usize)
                / factorial(self.a as usize + self.b as usize + 1),
            0.0,
        )
    }

    /// Product of exponent tuples (no reduction).
    pub fn mul(&self, other: &Mono) -> Mono {
        Mono::new(
            self.a + other.a,
            self.b + other.b,
            self.c + other.c,
            self.d + other.d,
        )
    }
}

const FACTORIALS: usize = 64;

fn factorial(n: usize) -> Scalar {
    debug_assert!(n < FACTORIALS);
    static TABLE: std::sync::OnceLock<[Scalar; FACTORIALS]> = std::sync::OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = [1.0; FACTORIALS];
        for i in 1..FACTORIALS {
            t[i] = t[i - 1] * i as Scalar;
        }
        t
    })[n]
}

/// Canonical monomials of total degree `≤ n`, in lexicographic `(a,b,c,d)`
/// order. This is the summation and basis order used everywhere.
pub fn canonical_basis(n: usize) -> Vec<Mono> {
    let mut out = Vec::with_capacity(basis_dim(n));
    let n = n as u8;
    for a in 0..=n {
        for b in 0..=(n - a) {
            for c in 0..=(n - a - b) {
                if a != 0 && c != 0 {
                    continue;
                }
                for d in 0..=(n - a - b - c) {
                    out.push(Mono::new(a, b, c, d));
                }
            }
        }
    }
    out.sort();
    out
}

/// Dimension of the canonical basis of degree `≤ n`: `Σ_{k≤n} (k+1)²`.
pub fn basis_dim(n: usize) -> usize {
    let m = n + 1;
    m * (m + 1) * (2 * m + 1) / 6
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduction_is_canonical_and_degree_bounded() {
        let m = Mono::new(3, 1, 2, 4);
        let red = m.reduce();
        assert_eq!(red.len(), 3);
        for (r, _) in &red {
            assert!(r.is_canonical());
            assert!(r.degree() <= m.degree());
        }
        // z³ w z̄² w̄⁴ = z (1 - ww̄)² w w̄⁴ = z w w̄⁴ - 2 z w² w̄⁵ + z w³ w̄⁶
        assert_eq!(red[0], (Mono::new(1, 1, 0, 4), 1.0));
        assert_eq!(red[1], (Mono::new(1, 2, 0, 5), -2.0));
        assert_eq!(red[2], (Mono::new(1, 3, 0, 6), 1.0));
    }

    #[test]
    fn integral_golden_values() {
        // ∫ 1 = 4π², ∫ |z|² = 2π², ∫ z = 0
        assert!((Mono::ONE.integral().re - VOLUME).abs() < 1e-12);
        assert!((Mono::new(1, 0, 1, 0).integral().re - VOLUME / 2.0).abs() < 1e-12);
        assert_eq!(Mono::new(1, 0, 0, 0).integral(), C::new(0.0, 0.0));
        // ∫ |z|²|w|² = 4π² · 1·1/3! = 4π²/6
        assert!((Mono::new(1, 1, 1, 1).integral().re - VOLUME / 6.0).abs() < 1e-12);
    }

    #[test]
    fn basis_dims_match_harmonic_counts() {
        assert_eq!(basis_dim(0), 1);
        assert_eq!(basis_dim(2), 14);
        assert_eq!(basis_dim(4), 55);
        assert_eq!(basis_dim(6), 140);
        assert_eq!(basis_dim(8), 285);
        for n in 0..=8 {
            assert_eq!(canonical_basis(n).len(), basis_dim(n));
        }
    }
}
