//! Thruster faults and proximity disturbances applied between the
//! controller output and the truth dynamics.

use serde::{Deserialize, Serialize};

/// Multiplicative and additive thruster/rudder fault parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FaultConfig {
    pub rudder_factor: f64,
    pub rudder_bias: f64,
    pub thrust_factor_l: f64,
    pub thrust_factor_r: f64,
    pub thrust_bias_l: f64,
    pub thrust_bias_r: f64,
}

impl Default for FaultConfig {
    fn default() -> Self {
        Self::identity()
    }
}

impl FaultConfig {
    pub const fn identity() -> Self {
        Self {
            rudder_factor: 1.0,
            rudder_bias: 0.0,
            thrust_factor_l: 1.0,
            thrust_factor_r: 1.0,
            thrust_bias_l: 0.0,
            thrust_bias_r: 0.0,
        }
    }

    /// Adds a rotational bias `(+f, -f)` on top of the existing thrust biases.
    pub fn with_rotational_bias(mut self, f: f64) -> Self {
        self.thrust_bias_l += f;
        self.thrust_bias_r -= f;
        self
    }

    /// Element-wise composition: factors multiply, biases add.
    pub fn compose(&self, other: &FaultConfig) -> FaultConfig {
        FaultConfig {
            rudder_factor: self.rudder_factor * other.rudder_factor,
            rudder_bias: self.rudder_bias + other.rudder_bias,
            thrust_factor_l: self.thrust_factor_l * other.thrust_factor_l,
            thrust_factor_r: self.thrust_factor_r * other.thrust_factor_r,
            thrust_bias_l: self.thrust_bias_l + other.thrust_bias_l,
            thrust_bias_r: self.thrust_bias_r + other.thrust_bias_r,
        }
    }
}

/// Faulty thruster commands `(u_l, u_r)`.
///
/// The rudder fault scales the differential part of the command pair; the
/// configured rudder bias is split evenly with opposite signs.
pub fn apply_fault(u_l: f64, u_r: f64, cfg: &FaultConfig) -> (f64, f64) {
    let half = (cfg.rudder_factor - 1.0) / 2.0;
    let rb_l = half * (u_l - u_r) + 0.5 * cfg.rudder_bias;
    let rb_r = half * (u_r - u_l) - 0.5 * cfg.rudder_bias;
    (
        u_l * cfg.thrust_factor_l + cfg.thrust_bias_l + rb_l,
        u_r * cfg.thrust_factor_r + cfg.thrust_bias_r + rb_r,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HullWashConfig {
    pub max_bias: f64,
    pub range: f64,
}

impl Default for HullWashConfig {
    fn default() -> Self {
        Self {
            max_bias: 20.0,
            range: 15.0,
        }
    }
}

/// Rotational bias from a nearby hull at absolute separations `(sep_x, sep_y)`.
pub fn hull_wash(sep_x: f64, sep_y: f64, delta: f64, cfg: &HullWashConfig) -> f64 {
    let (sx, sy) = (sep_x.abs(), sep_y.abs());
    if sx >= cfg.range || sy >= cfg.range {
        return 0.0;
    }
    delta * cfg.max_bias * (1.0 - sx / cfg.range) * (1.0 - sy / cfg.range)
}

/// Sign of the vertical component of `e(own) x e(other)`, with
/// `e(t) = [sin t, cos t, 0]`. Parallel or antiparallel headings give `+1`.
pub fn hull_wash_direction(own_heading: f64, other_heading: f64) -> f64 {
    let (so, co) = own_heading.sin_cos();
    let (st, ct) = other_heading.sin_cos();
    let z = so * ct - co * st;
    if z < 0.0 {
        -1.0
    } else {
        1.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BankEffectConfig {
    pub canal_width: f64,
    pub deadzone_width: f64,
    pub min_bias: f64,
    pub max_bias: f64,
    pub halt_bias: f64,
}

impl Default for BankEffectConfig {
    fn default() -> Self {
        Self {
            canal_width: 8.0,
            deadzone_width: 1.0,
            min_bias: 3.0,
            max_bias: 20.0,
            halt_bias: -99.0,
        }
    }
}

/// Outcome of the bank-effect model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum BankEffect {
    /// Rotational bias applied as `(+f, -f)` on the thrusters.
    Bias(f64),
    /// The vessel has reached the bank; both thrusters receive this bias.
    Halt(f64),
}

impl BankEffect {
    pub fn is_halt(&self) -> bool {
        matches!(self, BankEffect::Halt(_))
    }

    /// The fault contribution this outcome implies.
    pub fn as_fault(&self) -> FaultConfig {
        match *self {
            BankEffect::Bias(f) => FaultConfig::identity().with_rotational_bias(f),
            BankEffect::Halt(b) => FaultConfig {
                thrust_bias_l: b,
                thrust_bias_r: b,
                ..FaultConfig::identity()
            },
        }
    }
}

/// Bank suction at lateral offset `dy` from the canal centerline.
pub fn bank_effect(dy_centerline: f64, delta: f64, cfg: &BankEffectConfig) -> BankEffect {
    let dy = dy_centerline.abs();
    let inner = cfg.deadzone_width / 2.0;
    let outer = cfg.canal_width / 2.0;
    if dy < inner {
        BankEffect::Bias(0.0)
    } else if dy < outer {
        BankEffect::Bias(
            delta * ((cfg.max_bias - cfg.min_bias) * (1.0 - (outer - dy) / (outer - inner)) + cfg.min_bias),
        )
    } else {
        BankEffect::Halt(cfg.halt_bias)
    }
}

/// Constant drag-device loads (drogue, sail), expressed as matched command biases.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct DragDeviceConfig {
    pub surge_bias: f64,
    pub yaw_bias: f64,
}

pub fn drag_device_bias(cfg: &DragDeviceConfig, active: bool) -> (f64, f64) {
    if active {
        (cfg.surge_bias, cfg.yaw_bias)
    } else {
        (0.0, 0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn fault_examples() {
        assert_eq!(apply_fault(50.0, 30.0, &FaultConfig::identity()), (50.0, 30.0));
        let left_half = FaultConfig {
            thrust_factor_l: 0.5,
            ..FaultConfig::identity()
        };
        assert_eq!(apply_fault(50.0, 50.0, &left_half), (25.0, 50.0));
        let rudder = FaultConfig {
            rudder_factor: 2.0,
            ..FaultConfig::identity()
        };
        assert_eq!(apply_fault(60.0, 40.0, &rudder), (70.0, 30.0));
    }

    #[test]
    fn hull_wash_examples() {
        let cfg = HullWashConfig::default();
        assert_eq!(hull_wash(16.0, 3.0, 1.0, &cfg), 0.0);
        assert_eq!(hull_wash(0.0, 0.0, 1.0, &cfg), 20.0);
        assert_abs_diff_eq!(hull_wash(7.5, 7.5, -1.0, &cfg), -5.0, epsilon = 1e-12);
        assert_eq!(hull_wash(15.0, 0.0, 1.0, &cfg), 0.0);
    }

    #[test]
    fn direction_examples() {
        assert_eq!(hull_wash_direction(0.0, PI / 2.0), -1.0);
        assert_eq!(hull_wash_direction(PI / 2.0, 0.0), 1.0);
        assert_eq!(hull_wash_direction(0.7, 0.7), 1.0);
    }

    #[test]
    fn bank_examples() {
        let cfg = BankEffectConfig::default();
        assert_eq!(bank_effect(0.3, 1.0, &cfg), BankEffect::Bias(0.0));
        assert_eq!(bank_effect(4.0, 1.0, &cfg), BankEffect::Halt(-99.0));
        match bank_effect(2.25, 1.0, &cfg) {
            BankEffect::Bias(f) => assert_abs_diff_eq!(f, 11.5, epsilon = 1e-12),
            other => panic!("unexpected {other:?}"),
        }
        // Jump of F_min at the deadzone edge.
        assert_eq!(bank_effect(0.5, 1.0, &cfg), BankEffect::Bias(3.0));
        assert!(bank_effect(4.0, -1.0, &cfg).is_halt());
    }

    #[test]
    fn drag_device_pass_through() {
        let drogue = DragDeviceConfig {
            surge_bias: -15.0,
            yaw_bias: 0.0,
        };
        assert_eq!(drag_device_bias(&drogue, false), (0.0, 0.0));
        assert_eq!(drag_device_bias(&drogue, true), (-15.0, 0.0));
        let sail = DragDeviceConfig {
            surge_bias: -5.0,
            yaw_bias: 8.0,
        };
        assert_eq!(drag_device_bias(&sail, true), (-5.0, 8.0));
    }

    proptest! {
        #[test]
        fn identity_fault_is_identity(l in -100.0f64..100.0, r in -100.0f64..100.0) {
            prop_assert_eq!(apply_fault(l, r, &FaultConfig::identity()), (l, r));
        }

        #[test]
        fn rudder_terms_are_antisymmetric(l in -100.0f64..100.0, r in -100.0f64..100.0, f in 0.0f64..3.0) {
            let cfg = FaultConfig { rudder_factor: f, ..FaultConfig::identity() };
            let (fl, fr) = apply_fault(l, r, &cfg);
            prop_assert!(((fl - l) + (fr - r)).abs() < 1e-9);
        }

        #[test]
        fn direction_is_antisymmetric(a in -PI..PI, b in -PI..PI) {
            let z = (a - b).sin();
            prop_assume!(z.abs() > 1e-9);
            prop_assert_eq!(hull_wash_direction(a, b), -hull_wash_direction(b, a));
        }

        #[test]
        fn hull_wash_continuous_and_bounded(x in 0.0f64..20.0, y in 0.0f64..20.0) {
            let cfg = HullWashConfig::default();
            let f = hull_wash(x, y, 1.0, &cfg);
            prop_assert!((0.0..=20.0).contains(&f));
            let g = hull_wash(x + 1e-7, y, 1.0, &cfg);
            prop_assert!((f - g).abs() < 1e-6);
        }

        #[test]
        fn bank_ramp_is_monotone(a in 0.5f64..4.0, b in 0.5f64..4.0) {
            let cfg = BankEffectConfig::default();
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            if let (BankEffect::Bias(fl), BankEffect::Bias(fh)) = (bank_effect(lo, 1.0, &cfg), bank_effect(hi, 1.0, &cfg)) {
                prop_assert!(fl <= fh);
            }
        }
    }
}
