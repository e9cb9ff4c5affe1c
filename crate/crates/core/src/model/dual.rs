//! Forward-mode dual numbers carrying derivatives with respect to
//! (vgs, vds). Used to get exact small-signal conductances out of the same
//! code path that computes the current.

use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Dual {
    pub v: f64,
    pub d: [f64; 2],
}

impl Dual {
    pub fn constant(v: f64) -> Self {
        Dual { v, d: [0.0, 0.0] }
    }

    pub fn var(v: f64, d: [f64; 2]) -> Self {
        Dual { v, d }
    }

    fn chain(self, v: f64, dv: f64) -> Self {
        Dual {
            v,
            d: [self.d[0] * dv, self.d[1] * dv],
        }
    }

    /// ln(1 + e^x), evaluated without overflow.
    pub fn softplus(self) -> Self {
        self.chain(softplus(self.v), logistic(self.v))
    }

    /// `self^p` for a constant exponent; the derivative is taken as zero at
    /// an exact zero base.
    pub fn powf(self, p: f64) -> Self {
        let val = self.v.powf(p);
        let dv = if self.v > 0.0 { p * val / self.v } else { 0.0 };
        self.chain(val, dv)
    }

    pub fn sqrt(self) -> Self {
        let val = self.v.sqrt();
        self.chain(val, 0.5 / val)
    }

    pub fn max_const(self, floor: f64) -> Self {
        if self.v >= floor {
            self
        } else {
            Dual::constant(floor)
        }
    }
}

pub(crate) fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

pub(crate) fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

impl Add for Dual {
    type Output = Dual;
    fn add(self, o: Dual) -> Dual {
        Dual {
            v: self.v + o.v,
            d: [self.d[0] + o.d[0], self.d[1] + o.d[1]],
        }
    }
}

impl Sub for Dual {
    type Output = Dual;
    fn sub(self, o: Dual) -> Dual {
        Dual {
            v: self.v - o.v,
            d: [self.d[0] - o.d[0], self.d[1] - o.d[1]],
        }
    }
}

impl Mul for Dual {
    type Output = Dual;
    fn mul(self, o: Dual) -> Dual {
        Dual {
            v: self.v * o.v,
            d: [
                self.d[0] * o.v + self.v * o.d[0],
                self.d[1] * o.v + self.v * o.d[1],
            ],
        }
    }
}

impl Div for Dual {
    type Output = Dual;
    fn div(self, o: Dual) -> Dual {
        let inv = 1.0 / o.v;
        let q = self.v * inv;
        Dual {
            v: q,
            d: [(self.d[0] - q * o.d[0]) * inv, (self.d[1] - q * o.d[1]) * inv],
        }
    }
}

impl Neg for Dual {
    type Output = Dual;
    fn neg(self) -> Dual {
        Dual {
            v: -self.v,
            d: [-self.d[0], -self.d[1]],
        }
    }
}

impl Add<f64> for Dual {
    type Output = Dual;
    fn add(self, o: f64) -> Dual {
        Dual { v: self.v + o, ..self }
    }
}

impl Sub<f64> for Dual {
    type Output = Dual;
    fn sub(self, o: f64) -> Dual {
        Dual { v: self.v - o, ..self }
    }
}

impl Mul<f64> for Dual {
    type Output = Dual;
    fn mul(self, o: f64) -> Dual {
        Dual {
            v: self.v * o,
            d: [self.d[0] * o, self.d[1] * o],
        }
    }
}

impl Div<f64> for Dual {
    type Output = Dual;
    fn div(self, o: f64) -> Dual {
        self * (1.0 / o)
    }
}
