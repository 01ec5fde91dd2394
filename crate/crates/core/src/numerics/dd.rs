use std::ops::{Add, Div, Mul, Neg, Sub};

/// Scalar arithmetic shared by `f64` and [`Dd`], enough to evaluate the
/// tagger's forward pass.
pub trait Real:
    Copy
    + PartialEq
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn from_f64(v: f64) -> Self;
    fn to_f64(self) -> f64;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn tanh(self) -> Self;

    /// `self * a` for a plain `f64` factor.
    fn mul_f64(self, a: f64) -> Self {
        self * Self::from_f64(a)
    }

    /// `sum_i a_i * v_i`.
    fn dot(a: &[f64], v: &[Self]) -> Self {
        a.iter()
            .zip(v)
            .fold(Self::zero(), |acc, (&x, &y)| acc + y.mul_f64(x))
    }

    fn zero() -> Self {
        Self::from_f64(0.0)
    }

    fn one() -> Self {
        Self::from_f64(1.0)
    }

    fn sigmoid(self) -> Self {
        Self::one() / (Self::one() + (-self).exp())
    }

    fn max(self, other: Self) -> Self {
        if other.to_f64() > self.to_f64() {
            other
        } else {
            self
        }
    }
}

impl Real for f64 {
    fn from_f64(v: f64) -> Self {
        v
    }

    fn to_f64(self) -> f64 {
        self
    }

    fn exp(self) -> Self {
        f64::exp(self)
    }

    fn ln(self) -> Self {
        f64::ln(self)
    }

    fn tanh(self) -> Self {
        f64::tanh(self)
    }
}

/// Double-double number: an unevaluated sum `hi + lo` with `|lo| <= ulp(hi) / 2`,
/// good for about 32 significant digits.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

const LN2: Dd = Dd {
    hi: std::f64::consts::LN_2,
    lo: 2.319_046_813_846_299_6e-17,
};

/// `1/n!` for `n = 2..=5`.
const INV_FACT: [Dd; 4] = [
    Dd { hi: 0.5, lo: 0.0 },
    Dd {
        hi: 0.166_666_666_666_666_66,
        lo: 9.251_858_538_542_97e-18,
    },
    Dd {
        hi: 0.041_666_666_666_666_664,
        lo: 2.312_964_634_635_742_7e-18,
    },
    Dd {
        hi: 0.008_333_333_333_333_333,
        lo: 1.156_482_317_317_871_4e-19,
    },
];

/// `2^(j/64)` for `j = 0..64`.
#[rustfmt::skip]
const EXP2_TABLE: [Dd; 64] = [
    Dd { hi: 1.0, lo: 0.0 },
    Dd { hi: 1.0108892860517005, lo: -1.5234778603368577e-17 },
    Dd { hi: 1.0218971486541166, lo: 5.109225028973444e-17 },
    Dd { hi: 1.0330248790212284, lo: 7.600838874027088e-18 },
    Dd { hi: 1.0442737824274138, lo: 8.551889705537965e-17 },
    Dd { hi: 1.0556451783605572, lo: 1.759325738772092e-18 },
    Dd { hi: 1.0671404006768237, lo: -7.899853966841582e-17 },
    Dd { hi: 1.0787607977571199, lo: -6.656660436056593e-17 },
    Dd { hi: 1.0905077326652577, lo: -3.046782079812471e-17 },
    Dd { hi: 1.102382583307841, lo: 5.2660368715706944e-17 },
    Dd { hi: 1.1143867425958924, lo: 1.0410278456845571e-16 },
    Dd { hi: 1.1265216186082418, lo: 5.165856758795457e-17 },
    Dd { hi: 1.1387886347566916, lo: 8.912812676025408e-17 },
    Dd { hi: 1.1511892299529827, lo: 3.250710218863827e-17 },
    Dd { hi: 1.1637248587775775, lo: 3.8292048369240935e-17 },
    Dd { hi: 1.1763969916502812, lo: 5.554203254218079e-17 },
    Dd { hi: 1.189207115002721, lo: 3.982015231465646e-17 },
    Dd { hi: 1.202156731452703, lo: 6.644981499252301e-17 },
    Dd { hi: 1.215247359980469, lo: -7.712630692681488e-17 },
    Dd { hi: 1.22848053610687, lo: -1.89878163130253e-17 },
    Dd { hi: 1.241857812073484, lo: 4.658027591836937e-17 },
    Dd { hi: 1.255380757024691, lo: -6.7113898212968784e-18 },
    Dd { hi: 1.2690509571917332, lo: 2.667932131342186e-18 },
    Dd { hi: 1.2828700160787783, lo: 1.713594918243561e-17 },
    Dd { hi: 1.2968395546510096, lo: 2.5382502794888315e-17 },
    Dd { hi: 1.3109612115247644, lo: -7.181536135519454e-17 },
    Dd { hi: 1.3252366431597413, lo: -2.8587312100388614e-17 },
    Dd { hi: 1.339667524053303, lo: 8.927282594831732e-17 },
    Dd { hi: 1.3542555469368927, lo: 7.70094837980299e-17 },
    Dd { hi: 1.3690024229745905, lo: 9.593797919118849e-17 },
    Dd { hi: 1.383909881963832, lo: -6.770511658794786e-17 },
    Dd { hi: 1.3989796725383112, lo: -9.614213209051323e-17 },
    Dd { hi: std::f64::consts::SQRT_2, lo: -9.667293313452913e-17 },
    Dd { hi: 1.42961333839197, lo: -1.2031642489053655e-17 },
    Dd { hi: 1.4451808069770467, lo: -3.0237581349939873e-17 },
    Dd { hi: 1.460917794180647, lo: -5.600377186075216e-17 },
    Dd { hi: 1.4768261459394993, lo: -3.483994556892796e-17 },
    Dd { hi: 1.4929077282912648, lo: 1.4192920154284036e-17 },
    Dd { hi: 1.5091644275934228, lo: -1.016455327754295e-16 },
    Dd { hi: 1.5255981507445384, lo: -1.1024941712342561e-16 },
    Dd { hi: 1.5422108254079407, lo: 7.949834809697621e-17 },
    Dd { hi: 1.559004400237837, lo: 3.7812070533575275e-17 },
    Dd { hi: 1.5759808451078865, lo: -1.0136916471278304e-17 },
    Dd { hi: 1.593142151342267, lo: -1.0094406542311964e-16 },
    Dd { hi: 1.6104903319492543, lo: 2.4707192569797888e-17 },
    Dd { hi: 1.6280274218573478, lo: -6.712955084707084e-17 },
    Dd { hi: 1.645755478153965, lo: -1.0125679913674773e-16 },
    Dd { hi: 1.6636765803267364, lo: 5.8909926967131e-17 },
    Dd { hi: 1.681792830507429, lo: 8.199010020581497e-17 },
    Dd { hi: 1.7001063537185235, lo: -8.0237193703977e-18 },
    Dd { hi: 1.718619298122478, lo: -1.851380418263111e-17 },
    Dd { hi: 1.7373338352737062, lo: 3.164389299292957e-17 },
    Dd { hi: 1.7562521603732995, lo: 2.960140695448873e-17 },
    Dd { hi: 1.7753764925265212, lo: 6.429731796556572e-17 },
    Dd { hi: 1.7947090750031072, lo: 1.8227458427912087e-17 },
    Dd { hi: 1.8142521755003989, lo: -9.969531538920349e-17 },
    Dd { hi: 1.8340080864093424, lo: 3.283107224245627e-17 },
    Dd { hi: 1.8539791250833855, lo: 9.761887490727594e-17 },
    Dd { hi: 1.8741676341103, lo: -6.122763413004143e-17 },
    Dd { hi: 1.8945759815869656, lo: 3.4034035352165297e-17 },
    Dd { hi: 1.9152065613971474, lo: -1.0619946056195963e-16 },
    Dd { hi: 1.9360617934922943, lo: 1.0332385960676326e-16 },
    Dd { hi: 1.9571441241754002, lo: 8.960767791036668e-17 },
    Dd { hi: 1.978456026387951, lo: 4.0388753109278167e-17 },
];

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl Dd {
    pub const fn new(v: f64) -> Self {
        Dd { hi: v, lo: 0.0 }
    }

    fn renorm(hi: f64, lo: f64) -> Self {
        let (hi, lo) = quick_two_sum(hi, lo);
        Dd { hi, lo }
    }

    /// Exact multiplication by `2^k`.
    fn ldexp(self, k: i32) -> Self {
        let f = 2f64.powi(k);
        Dd {
            hi: self.hi * f,
            lo: self.lo * f,
        }
    }
}

impl Add for Dd {
    type Output = Dd;
    fn add(self, b: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, b.hi);
        let (t, f) = two_sum(self.lo, b.lo);
        let (s, e) = quick_two_sum(s, e + t);
        Dd::renorm(s, e + f)
    }
}

impl Neg for Dd {
    type Output = Dd;
    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Sub for Dd {
    type Output = Dd;
    fn sub(self, b: Dd) -> Dd {
        self + (-b)
    }
}

impl Mul for Dd {
    type Output = Dd;
    fn mul(self, b: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, b.hi);
        Dd::renorm(p, e + (self.hi * b.lo + self.lo * b.hi))
    }
}

impl Div for Dd {
    type Output = Dd;
    fn div(self, b: Dd) -> Dd {
        let q1 = self.hi / b.hi;
        let r = self - b * Dd::new(q1);
        let q2 = r.hi / b.hi;
        let r = r - b * Dd::new(q2);
        let q3 = r.hi / b.hi;
        let (q1, q2) = quick_two_sum(q1, q2);
        Dd { hi: q1, lo: q2 } + Dd::new(q3)
    }
}

impl Real for Dd {
    fn from_f64(v: f64) -> Self {
        Dd::new(v)
    }

    fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    fn mul_f64(self, a: f64) -> Self {
        let (p, e) = two_prod(self.hi, a);
        Dd::renorm(p, e + self.lo * a)
    }

    /// Compensated dot product: exact products and sums on the high words,
    /// the low words folded into the error term.
    fn dot(a: &[f64], v: &[Self]) -> Self {
        let (mut s, mut err) = (0.0, 0.0);
        for (&x, y) in a.iter().zip(v) {
            let (p, e) = two_prod(x, y.hi);
            let (t, f) = two_sum(s, p);
            s = t;
            err += e + f + x * y.lo;
        }
        Dd::renorm(s, err)
    }

    fn exp(self) -> Self {
        if self.hi > 709.0 {
            return Dd::new(f64::INFINITY);
        }
        if self.hi < -745.0 {
            return Dd::new(0.0);
        }
        // x = (64k + j) ln2/64 + r with |r| <= ln2/128; terms of exp(r) past
        // r^5 are below 1e-16 relative and need only f64
        let big = (self.hi * (64.0 / LN2.hi)).round();
        let r = self - (LN2 * Dd::new(big)).ldexp(-6);
        let j = big.rem_euclid(64.0);
        let k = ((big - j) / 64.0) as i32;
        let x = r.hi;
        let tail = 1.0 / 720.0 + x * (1.0 / 5040.0 + x * (1.0 / 40320.0 + x * (1.0 / 362_880.0)));
        let mut p = Dd::new(tail);
        for c in INV_FACT.iter().rev() {
            p = *c + r * p;
        }
        p = Dd::new(1.0) + r * p;
        p = Dd::new(1.0) + r * p;
        (EXP2_TABLE[j as usize] * p).ldexp(k)
    }

    fn ln(self) -> Self {
        if self.hi <= 0.0 {
            return Dd::new(if self.hi == 0.0 {
                f64::NEG_INFINITY
            } else {
                f64::NAN
            });
        }
        let mut y = Dd::new(self.hi.ln());
        for _ in 0..2 {
            y = y + self * (-y).exp() - Dd::new(1.0);
        }
        y
    }

    fn tanh(self) -> Self {
        if self.hi == 0.0 {
            return self;
        }
        let a = if self.hi < 0.0 { -self } else { self };
        let e = (-a.ldexp(1)).exp();
        let t = (Dd::new(1.0) - e) / (Dd::new(1.0) + e);
        if self.hi < 0.0 {
            -t
        } else {
            t
        }
    }
}
