use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Critical exponents in the dimension-normalized convention
/// `nu' = nu d`, `z' = z / d`, with the quench power `r`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentSet {
    pub beta: f64,
    pub nu_p: f64,
    pub z_p: f64,
    pub r: f64,
    /// Dimension used for conversions when the lattice dimension is not
    /// finite (upper critical dimension).
    pub d_u: Option<f64>,
}

impl ExponentSet {
    pub fn new(beta: f64, nu_p: f64, z_p: f64) -> Self {
        Self { beta, nu_p, z_p, r: 1.0, d_u: None }
    }

    /// From ordinary exponents on a `d`-dimensional lattice.
    pub fn from_unprimed(beta: f64, nu: f64, z: f64, d: f64) -> Self {
        Self::new(beta, nu * d, z / d)
    }

    pub fn with_r(mut self, r: f64) -> Self {
        self.r = r;
        self
    }

    pub fn with_upper_critical_dimension(mut self, d_u: f64) -> Self {
        self.d_u = Some(d_u);
        self
    }

    /// `nu = nu' / d`.
    pub fn nu(&self, d: f64) -> f64 {
        self.nu_p / d
    }

    /// `z = z' d`.
    pub fn z(&self, d: f64) -> f64 {
        self.z_p * d
    }

    /// Collapse exponent of the observable, `2 beta / nu'`.
    pub fn b(&self) -> f64 {
        2.0 * self.beta / self.nu_p
    }

    /// Kibble-Zurek exponent `z' r + 1/nu'`.
    pub fn k(&self) -> f64 {
        self.z_p * self.r + 1.0 / self.nu_p
    }
}

/// Log-log slope magnitude of the observable against velocity in the
/// non-adiabatic regime, `x = (1 - 2 beta/nu') / (z' r + 1/nu')`.
pub fn kz_slope(exponents: &ExponentSet) -> Result<f64> {
    kz_slope_from(exponents.b(), exponents.k())
}

/// [`kz_slope`] from collapse exponents `b` and `k`.
pub fn kz_slope_from(b: f64, k: f64) -> Result<f64> {
    if k == 0.0 || !k.is_finite() || !b.is_finite() {
        return Err(Error::Degenerate(format!("k = {k}, b = {b}")));
    }
    Ok((1.0 - b) / k)
}

/// Velocity `v0 N^-alpha` of a size-dependent schedule.
pub fn schedule_velocity(n: usize, alpha: f64, v0: f64) -> f64 {
    v0 * (n as f64).powf(-alpha)
}

/// A schedule `v ~ N^-alpha` stays in the slow regime when `alpha` exceeds
/// the fitted Kibble-Zurek exponent.
pub fn schedule_is_slow(alpha: f64, k: f64) -> bool {
    alpha > k
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Measured {
    pub value: f64,
    pub err: f64,
}

impl Measured {
    pub const fn exact(value: f64) -> Self {
        Self { value, err: 0.0 }
    }
}

/// Known results for comparison, with `r = 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ReferenceExponents {
    pub name: &'static str,
    /// `beta / nu'`.
    pub beta_over_nu_p: Measured,
    /// `z' + 1/nu'`.
    pub kz: Measured,
    /// Full set when known analytically.
    pub exponents: Option<ExponentSet>,
}

pub const REFERENCE_EXPONENTS: [ReferenceExponents; 5] = [
    ReferenceExponents {
        name: "classical 3-regular",
        beta_over_nu_p: Measured::exact(1.0 / 3.0),
        kz: Measured::exact(1.0),
        exponents: Some(ExponentSet { beta: 1.0, nu_p: 3.0, z_p: 2.0 / 3.0, r: 1.0, d_u: Some(6.0) }),
    },
    ReferenceExponents {
        name: "infinite-dimensional quantum glass",
        beta_over_nu_p: Measured::exact(0.5),
        kz: Measured::exact(0.75),
        exponents: Some(ExponentSet { beta: 1.0, nu_p: 2.0, z_p: 0.25, r: 1.0, d_u: Some(8.0) }),
    },
    ReferenceExponents {
        name: "fully connected quantum glass",
        beta_over_nu_p: Measured { value: 0.47, err: 0.03 },
        kz: Measured { value: 0.83, err: 0.12 },
        exponents: None,
    },
    ReferenceExponents {
        name: "quantum 3-regular glass",
        beta_over_nu_p: Measured { value: 0.43, err: 0.02 },
        kz: Measured { value: 1.34, err: 0.11 },
        exponents: None,
    },
    ReferenceExponents {
        name: "quantum Ising chain",
        beta_over_nu_p: Measured::exact(0.125),
        kz: Measured::exact(2.0),
        exponents: Some(ExponentSet { beta: 0.125, nu_p: 1.0, z_p: 1.0, r: 1.0, d_u: None }),
    },
];

/// Looks up a reference entry by name.
pub fn reference(name: &str) -> Option<&'static ReferenceExponents> {
    REFERENCE_EXPONENTS.iter().find(|r| r.name == name)
}
