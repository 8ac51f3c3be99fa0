//! Complete elliptic integral of the first kind and the Jacobi elliptic
//! functions sn, cn, dn, both computed from the arithmetic-geometric mean.
//!
//! The modulus convention is `k` (not the parameter `m = k²`):
//! `K(k) = ∫₀^{π/2} dθ / √(1 - k² sin²θ)` and `sn(u; k) = sin am(u; k)`.

use thiserror::Error;

/// AGM iteration stops once the scale gap drops below this.
pub const AGM_TOL: f64 = 1e-15;
/// Hard cap on AGM iterations; quadratic convergence needs far fewer.
pub const AGM_MAX_ITERS: usize = 64;

#[derive(Debug, Error, PartialEq)]
pub enum EllipticError {
    #[error("modulus must lie in [0, 1], got {0}")]
    ModulusRange(f64),
    #[error("K(k) diverges as k -> 1")]
    Divergence,
}

/// Elliptic modulus, validated to lie in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Modulus(f64);

impl Modulus {
    pub fn new(k: f64) -> Result<Self, EllipticError> {
        if (0.0..=1.0).contains(&k) {
            Ok(Self(k))
        } else {
            Err(EllipticError::ModulusRange(k))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }

    /// Complementary modulus squared `1 - k²`, formed as `(1-k)(1+k)` to
    /// avoid cancellation near `k = 1`.
    fn comp_sq(self) -> f64 {
        (1.0 - self.0) * (1.0 + self.0)
    }
}

/// `K(k)` via `π / (2 agm(1, k'))`. Errors at `k = 1` where the integral
/// diverges.
pub fn complete_k(k: Modulus) -> Result<f64, EllipticError> {
    if k.get() == 1.0 {
        return Err(EllipticError::Divergence);
    }
    let mut a = 1.0f64;
    let mut b = k.comp_sq().sqrt();
    for _ in 0..AGM_MAX_ITERS {
        if (a - b).abs() < AGM_TOL {
            break;
        }
        let am = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = am;
    }
    Ok(std::f64::consts::FRAC_PI_2 / a)
}

/// Values of the three Jacobi functions at one argument.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jacobi {
    pub sn: f64,
    pub cn: f64,
    pub dn: f64,
}

/// sn, cn, dn by the descending Landen / AGM recurrence.
///
/// `k = 0` degenerates to (sin, cos, 1) and `k = 1` to (tanh, sech, sech);
/// both ends are returned exactly rather than through the recurrence.
pub fn jacobi_sn_cn_dn(u: f64, k: Modulus) -> Jacobi {
    let kv = k.get();
    if kv == 0.0 {
        return Jacobi {
            sn: u.sin(),
            cn: u.cos(),
            dn: 1.0,
        };
    }
    if kv == 1.0 {
        let sech = 1.0 / u.cosh();
        return Jacobi {
            sn: u.tanh(),
            cn: sech,
            dn: sech,
        };
    }

    let mut emc = k.comp_sq();
    let mut a = 1.0f64;
    let mut em = [0.0f64; AGM_MAX_ITERS];
    let mut en = [0.0f64; AGM_MAX_ITERS];
    let mut c = 0.0f64;
    let mut level = 0usize;
    for i in 0..AGM_MAX_ITERS {
        level = i;
        em[i] = a;
        emc = emc.sqrt();
        en[i] = emc;
        c = 0.5 * (a + emc);
        if (a - emc).abs() < AGM_TOL {
            break;
        }
        emc *= a;
        a = c;
    }

    let phi = c * u;
    let mut sn = phi.sin();
    let mut cn = phi.cos();
    let mut dn = 1.0;
    if sn != 0.0 {
        // back-substitute through the Landen levels using the cotangent form
        let mut aa = cn / sn;
        c *= aa;
        for i in (0..=level).rev() {
            let b = em[i];
            aa *= c;
            c *= dn;
            dn = (en[i] + aa) / (b + aa);
            aa = c / b;
        }
        let s = 1.0 / (c * c + 1.0).sqrt();
        sn = if sn < 0.0 { -s } else { s };
        cn = c * sn;
    }
    Jacobi { sn, cn, dn }
}
