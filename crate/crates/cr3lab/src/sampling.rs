//! Seeded random fields and named test exponents.
//!
//! The verification suites quantify over "random" scalar fields; all
//! randomness here is deterministic per seed so reports are reproducible.

use crate::field::Field;
use crate::mono::{canonical_basis, Mono};
use crate::{Scalar, C};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// `count` random complex fields of degree `≤ max_degree`, coefficients
/// uniform in the unit square, sparsity about one third of the basis.
pub fn random_fields(seed: u64, max_degree: usize, count: usize) -> Vec<Field> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let basis = canonical_basis(max_degree);
    (0..count)
        .map(|_| {
            let mut f = Field::zero();
            for m in &basis {
                if rng.gen_range(0.0..1.0) < 0.34 {
                    f.add_term(
                        *m,
                        C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                    );
                }
            }
            if f.is_empty() {
                f.add_term(Mono::ONE, C::new(rng.gen_range(0.1..1.0), 0.0));
            }
            f
        })
        .collect()
}

/// Random real-valued fields (conjugation-symmetrized).
pub fn random_real_fields(seed: u64, max_degree: usize, count: usize) -> Vec<Field> {
    random_fields(seed, max_degree, count)
        .into_iter()
        .map(|f| f.re())
        .collect()
}

/// The small fixed vocabulary of named test exponents.
///
/// `re_zwbar ↦ Re(z w̄)` is the default conformal perturbation direction;
/// `re_zw` and `im_zw` are CR-pluriharmonic, `zzbar` is not.
pub fn named_exponent(name: &str) -> Option<Field> {
    let f = match name {
        "zero" => Field::zero(),
        "re_z" => Field::z().re(),
        "im_z" => Field::z().im(),
        "re_w" => Field::w().re(),
        "re_zw" => Field::z().mul(&Field::w()).re(),
        "im_zw" => Field::z().mul(&Field::w()).im(),
        "re_zwbar" => Field::z().mul(&Field::wbar()).re(),
        "im_zwbar" => Field::z().mul(&Field::wbar()).im(),
        "re_z2" => Field::z().mul(&Field::z()).re(),
        "zzbar" => {
            // |z|² − 1/2, mean-free and not CR-pluriharmonic
            Field::z()
                .mul(&Field::zbar())
                .sub(&Field::real_constant(0.5))
        }
        _ => return None,
    };
    Some(f)
}

/// Random numbers in a range, seeded (used by the convexity sampling).
pub fn random_reals(seed: u64, lo: Scalar, hi: Scalar, count: usize) -> Vec<Scalar> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| rng.gen_range(lo..hi)).collect()
}
