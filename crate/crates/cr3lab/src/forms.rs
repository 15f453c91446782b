//! Exterior calculus over the reference coframe.
//!
//! 1-forms and 2-forms carry [`Field`] coefficients over the fixed reference
//! coframe `(θ, θ¹, θ¹̄)`. The exterior derivative uses the reference
//! structure constants
//! `dθ = i θ¹∧θ¹̄`, `dθ¹ = 2i θ∧θ¹`, `dθ¹̄ = −2i θ∧θ¹̄`,
//! which are validated by `d² = 0` in the test suite.

use crate::field::{Dir, Field};
use crate::workspace::Workspace;
use crate::{Scalar, C, I};
use serde::{Deserialize, Serialize};

/// Vector field `t·T + z1·Z₁ + z1b·Z₁̄` with `Field` coefficients.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FrameVector {
    pub t: Field,
    pub z1: Field,
    pub z1b: Field,
}

impl FrameVector {
    pub fn reeb_ref() -> Self {
        FrameVector {
            t: Field::one(),
            z1: Field::zero(),
            z1b: Field::zero(),
        }
    }

    pub fn z1_ref() -> Self {
        FrameVector {
            t: Field::zero(),
            z1: Field::one(),
            z1b: Field::zero(),
        }
    }

    /// Conjugate vector field: `conj(t·T + a·Z₁ + b·Z₁̄) = t̄·T + b̄·Z₁ + ā·Z₁̄`.
    pub fn conj(&self) -> Self {
        FrameVector {
            t: self.t.conj(),
            z1: self.z1b.conj(),
            z1b: self.z1.conj(),
        }
    }

    /// Directional derivative of a scalar field.
    pub fn apply(&self, ws: &Workspace, f: &Field) -> Field {
        ws.mul(&self.t, &f.frame_derive(Dir::T))
            .add(&ws.mul(&self.z1, &f.frame_derive(Dir::Z1)))
            .add(&ws.mul(&self.z1b, &f.frame_derive(Dir::Z1bar)))
    }
}

/// 1-form `t·θ + p·θ¹ + m·θ¹̄`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OneForm {
    pub t: Field,
    pub p: Field,
    pub m: Field,
}

impl OneForm {
    pub fn zero() -> Self {
        OneForm {
            t: Field::zero(),
            p: Field::zero(),
            m: Field::zero(),
        }
    }

    pub fn theta_ref() -> Self {
        OneForm {
            t: Field::one(),
            p: Field::zero(),
            m: Field::zero(),
        }
    }

    pub fn theta1_ref() -> Self {
        OneForm {
            t: Field::zero(),
            p: Field::one(),
            m: Field::zero(),
        }
    }

    pub fn conj(&self) -> Self {
        OneForm {
            t: self.t.conj(),
            p: self.m.conj(),
            m: self.p.conj(),
        }
    }

    pub fn add(&self, o: &OneForm) -> Self {
        OneForm {
            t: self.t.add(&o.t),
            p: self.p.add(&o.p),
            m: self.m.add(&o.m),
        }
    }

    pub fn sub(&self, o: &OneForm) -> Self {
        OneForm {
            t: self.t.sub(&o.t),
            p: self.p.sub(&o.p),
            m: self.m.sub(&o.m),
        }
    }

    pub fn scale(&self, s: C) -> Self {
        OneForm {
            t: self.t.scale(s),
            p: self.p.scale(s),
            m: self.m.scale(s),
        }
    }

    /// Multiplies every component by a scalar field.
    pub fn scale_field(&self, ws: &Workspace, f: &Field) -> Self {
        OneForm {
            t: ws.mul(&self.t, f),
            p: ws.mul(&self.p, f),
            m: ws.mul(&self.m, f),
        }
    }

    /// Pairing with a vector field.
    pub fn eval_on(&self, ws: &Workspace, v: &FrameVector) -> Field {
        ws.mul(&self.t, &v.t)
            .add(&ws.mul(&self.p, &v.z1))
            .add(&ws.mul(&self.m, &v.z1b))
    }

    /// Exterior derivative via the reference structure constants.
    pub fn d(&self, ws: &Workspace) -> TwoForm {
        let (f, g, h) = (&self.t, &self.p, &self.m);
        let tp = g
            .frame_derive(Dir::T)
            .sub(&f.frame_derive(Dir::Z1))
            .add(&g.scale(2.0 * I));
        let tm = h
            .frame_derive(Dir::T)
            .sub(&f.frame_derive(Dir::Z1bar))
            .sub(&h.scale(2.0 * I));
        let pm = h
            .frame_derive(Dir::Z1)
            .sub(&g.frame_derive(Dir::Z1bar))
            .add(&f.scale(I));
        let _ = ws;
        TwoForm { tp, tm, pm }
    }

    /// Checks `σ + σ̄ = 0` (pure imaginary as a form).
    pub fn antihermitian_defect(&self) -> Scalar {
        self.add(&self.conj()).l2_norm()
    }

    pub fn l2_norm(&self) -> Scalar {
        (self.t.l2_norm().powi(2) + self.p.l2_norm().powi(2) + self.m.l2_norm().powi(2)).sqrt()
    }
}

/// 2-form `tp·θ∧θ¹ + tm·θ∧θ¹̄ + pm·θ¹∧θ¹̄`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TwoForm {
    pub tp: Field,
    pub tm: Field,
    pub pm: Field,
}

impl TwoForm {
    pub fn zero() -> Self {
        TwoForm {
            tp: Field::zero(),
            tm: Field::zero(),
            pm: Field::zero(),
        }
    }

    pub fn add(&self, o: &TwoForm) -> Self {
        TwoForm {
            tp: self.tp.add(&o.tp),
            tm: self.tm.add(&o.tm),
            pm: self.pm.add(&o.pm),
        }
    }

    pub fn sub(&self, o: &TwoForm) -> Self {
        TwoForm {
            tp: self.tp.sub(&o.tp),
            tm: self.tm.sub(&o.tm),
            pm: self.pm.sub(&o.pm),
        }
    }

    pub fn scale(&self, s: C) -> Self {
        TwoForm {
            tp: self.tp.scale(s),
            tm: self.tm.scale(s),
            pm: self.pm.scale(s),
        }
    }

    pub fn scale_field(&self, ws: &Workspace, f: &Field) -> Self {
        TwoForm {
            tp: ws.mul(&self.tp, f),
            tm: ws.mul(&self.tm, f),
            pm: ws.mul(&self.pm, f),
        }
    }

    /// Evaluation on a pair of vector fields.
    pub fn eval_on(&self, ws: &Workspace, x: &FrameVector, y: &FrameVector) -> Field {
        let det = |a: &Field, b: &Field, c: &Field, d: &Field| ws.mul(a, d).sub(&ws.mul(b, c));
        ws.mul(&self.tp, &det(&x.t, &y.t, &x.z1, &y.z1))
            .add(&ws.mul(&self.tm, &det(&x.t, &y.t, &x.z1b, &y.z1b)))
            .add(&ws.mul(&self.pm, &det(&x.z1, &y.z1, &x.z1b, &y.z1b)))
    }

    /// Exterior derivative: coefficient of `θ∧θ¹∧θ¹̄` (the basis 2-forms are
    /// closed, so only frame derivatives survive).
    pub fn d_coefficient(&self) -> Field {
        self.tp
            .frame_derive(Dir::Z1bar)
            .sub(&self.tm.frame_derive(Dir::Z1))
            .add(&self.pm.frame_derive(Dir::T))
    }

    pub fn l2_norm(&self) -> Scalar {
        (self.tp.l2_norm().powi(2) + self.tm.l2_norm().powi(2) + self.pm.l2_norm().powi(2)).sqrt()
    }

    pub fn max_at(&self, pts: &[crate::points::SPoint]) -> Scalar {
        self.tp
            .max_at(pts)
            .max(self.tm.max_at(pts))
            .max(self.pm.max_at(pts))
    }
}

/// Wedge product of two 1-forms.
pub fn wedge(ws: &Workspace, a: &OneForm, b: &OneForm) -> TwoForm {
    let det = |x: &Field, y: &Field, u: &Field, v: &Field| ws.mul(x, v).sub(&ws.mul(y, u));
    TwoForm {
        tp: det(&a.t, &a.p, &b.t, &b.p),
        tm: det(&a.t, &a.m, &b.t, &b.m),
        pm: det(&a.p, &a.m, &b.p, &b.m),
    }
}
