//! Wireless channel model: Rayleigh gains, SINR-derived transmit power as a
//! function of the selected data rate, and the rate-to-SSIM lookup.

use crate::{Error, Result};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

/// One interfering base station as seen by a user: transmit power, squared
/// channel gain towards the user and distance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Interferer {
    pub power_w: f64,
    pub gain_sq: f64,
    pub distance_m: f64,
}

/// Uplink of one user to its serving base station with frozen channel gains.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RadioLink {
    /// Bandwidth of one resource block in Hz.
    pub bandwidth_hz: f64,
    pub noise_w: f64,
    pub path_loss_exponent: f64,
    pub distance_m: f64,
    /// |H|^2 of the serving link.
    pub gain_sq: f64,
    pub interferers: Vec<Interferer>,
}

impl RadioLink {
    pub fn validate(&self) -> Result<()> {
        if self.bandwidth_hz <= 0.0 || self.noise_w <= 0.0 || self.path_loss_exponent <= 0.0 {
            return Err(Error::Config("radio link parameters must be positive".into()));
        }
        if self.distance_m <= 0.0 {
            return Err(Error::SingularLink("zero distance".into()));
        }
        if self.gain_sq < 0.0 {
            return Err(Error::Config("negative channel gain".into()));
        }
        Ok(())
    }

    /// (N + sum of received interference) / (H^2 d^-a): the watts needed per
    /// unit of `2^(g/B) - 1`.
    pub fn budget_w(&self) -> Result<f64> {
        if self.gain_sq <= 0.0 {
            return Err(Error::SingularLink("zero serving gain".into()));
        }
        if self.distance_m <= 0.0 {
            return Err(Error::SingularLink("zero distance".into()));
        }
        let a = self.path_loss_exponent;
        let interference: f64 = self
            .interferers
            .iter()
            .map(|i| i.power_w * i.gain_sq * i.distance_m.powf(-a))
            .sum();
        Ok((self.noise_w + interference) / (self.gain_sq * self.distance_m.powf(-a)))
    }

    /// Transmit power required to sustain `rate_bps` on this link. Strictly
    /// increasing in the rate and zero at rate zero.
    pub fn transmit_power_w(&self, rate_bps: f64) -> Result<f64> {
        Ok(self.budget_w()? * ((rate_bps / self.bandwidth_hz).exp2() - 1.0))
    }
}

/// Draws |H|^2 for a Rayleigh channel H = sqrt(1/2)(t + t'J) with t, t'
/// standard normal; the result is exponential with mean one.
pub fn sample_gain_sq<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let t: f64 = rng.sample(StandardNormal);
    let t2: f64 = rng.sample(StandardNormal);
    (t * t + t2 * t2) / 2.0
}

/// Ordered data rates with their SSIM scores. Both lists are strictly
/// increasing: higher rates always look better.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RateTable {
    rates_bps: Vec<f64>,
    ssim: Vec<f64>,
}

impl RateTable {
    pub fn new(rates_bps: Vec<f64>, ssim: Vec<f64>) -> Result<Self> {
        if rates_bps.is_empty() || rates_bps.len() != ssim.len() {
            return Err(Error::Config("rate and SSIM lists must be non-empty and equal".into()));
        }
        for w in rates_bps.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::Config("rates must be strictly increasing".into()));
            }
        }
        for w in ssim.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::Config("SSIM values must be strictly increasing".into()));
            }
        }
        if ssim.iter().any(|&s| s <= 0.0 || s > 1.0) {
            return Err(Error::Config("SSIM values must lie in (0,1]".into()));
        }
        if rates_bps[0] <= 0.0 {
            return Err(Error::Config("rates must be positive".into()));
        }
        Ok(RateTable { rates_bps, ssim })
    }

    /// The 2..8 Mbps ladder with its published SSIM endpoints; interior
    /// points follow the concave completion used throughout the experiments.
    pub fn nominal() -> Self {
        RateTable::new(
            vec![2e6, 3e6, 4e6, 5e6, 6e6, 7e6, 8e6],
            vec![0.955, 0.968, 0.974, 0.979, 0.984, 0.988, 0.991],
        )
        .expect("nominal table is valid")
    }

    pub fn len(&self) -> usize {
        self.rates_bps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rates_bps.is_empty()
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates_bps
    }

    pub fn rate(&self, idx: usize) -> f64 {
        self.rates_bps[idx]
    }

    pub fn ssim_at(&self, idx: usize) -> f64 {
        self.ssim[idx]
    }

    pub fn max_ssim(&self) -> f64 {
        *self.ssim.last().expect("non-empty table")
    }

    pub fn ssim_of_rate(&self, rate_bps: f64) -> Result<f64> {
        self.rates_bps
            .iter()
            .position(|&r| r == rate_bps)
            .map(|i| self.ssim[i])
            .ok_or(Error::UnknownRate(rate_bps))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn flat_link() -> RadioLink {
        RadioLink {
            bandwidth_hz: 1.0,
            noise_w: 1.0,
            path_loss_exponent: 1.0,
            distance_m: 1.0,
            gain_sq: 1.0,
            interferers: vec![],
        }
    }

    #[test]
    fn unit_link_one_bit_costs_one_watt() {
        assert!((flat_link().transmit_power_w(1.0).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_rate_costs_nothing() {
        assert_eq!(flat_link().transmit_power_w(0.0).unwrap(), 0.0);
    }

    #[test]
    fn interfered_link_matches_direct_arithmetic() {
        // Oracle evaluated term by term, independent of budget_w's code path.
        let link = RadioLink {
            bandwidth_hz: 180e3,
            noise_w: 1e-11,
            path_loss_exponent: 4.0,
            distance_m: 100.0,
            gain_sq: 0.5,
            interferers: vec![Interferer {
                power_w: 0.1,
                gain_sq: 0.3,
                distance_m: 300.0,
            }],
        };
        let interference = 0.1 * 0.3 / (300.0f64 * 300.0 * 300.0 * 300.0);
        let numerator = 1e-11 + interference;
        let denominator = 0.5 / (100.0f64 * 100.0 * 100.0 * 100.0);
        let expected = numerator / denominator * (2f64.powf(2e6 / 180e3) - 1.0);
        let got = link.transmit_power_w(2e6).unwrap();
        assert!((got - expected).abs() / expected < 1e-12);
        // Frozen from the oracle above.
        assert!((got - 6.0617).abs() < 1e-3, "got {got}");
    }

    #[test]
    fn zero_gain_is_singular() {
        let mut link = flat_link();
        link.gain_sq = 0.0;
        assert!(matches!(link.transmit_power_w(1.0), Err(Error::SingularLink(_))));
    }

    #[test]
    fn gain_trivial_draws() {
        // t = t' = 0 gives 0, t = t' = 1 gives 1; check the arithmetic shape.
        assert_eq!((0.0f64 * 0.0 + 0.0 * 0.0) / 2.0, 0.0);
        assert_eq!((1.0f64 * 1.0 + 1.0 * 1.0) / 2.0, 1.0);
    }

    #[test]
    fn gain_mean_is_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 1_000_000;
        let mean: f64 = (0..n).map(|_| sample_gain_sq(&mut rng)).sum::<f64>() / n as f64;
        assert!((mean - 1.0).abs() < 0.01, "mean {mean}");
    }

    #[test]
    fn nominal_table_endpoints() {
        let t = RateTable::nominal();
        assert_eq!(t.ssim_of_rate(2e6).unwrap(), 0.955);
        assert_eq!(t.ssim_of_rate(8e6).unwrap(), 0.991);
        assert!(matches!(t.ssim_of_rate(9e6), Err(Error::UnknownRate(_))));
        for i in 0..t.len() {
            let s = t.ssim_at(i);
            assert!(s > 0.0 && s <= 1.0);
        }
    }

    #[test]
    fn mis_shaped_tables_rejected() {
        assert!(RateTable::new(vec![1.0, 1.0], vec![0.5, 0.6]).is_err());
        assert!(RateTable::new(vec![1.0, 2.0], vec![0.6, 0.5]).is_err());
        assert!(RateTable::new(vec![1.0], vec![0.5, 0.6]).is_err());
    }

    #[test]
    fn power_monotone_over_table() {
        let link = RadioLink {
            bandwidth_hz: 180e3,
            noise_w: 1e-11,
            path_loss_exponent: 4.0,
            distance_m: 120.0,
            gain_sq: 0.8,
            interferers: vec![],
        };
        let table = RateTable::nominal();
        let mut last = 0.0;
        for &g in table.rates() {
            let p = link.transmit_power_w(g).unwrap();
            assert!(p > last);
            last = p;
        }
    }

    #[test]
    fn rate_indicator_identity() {
        // 2^(g e / B) = (1 - e) + e 2^(g / B) for e in {0, 1}, all table rates.
        let b = 180e3;
        for &g in RateTable::nominal().rates() {
            for e in [0.0f64, 1.0] {
                let lhs = (g * e / b).exp2();
                let rhs = (1.0 - e) + e * (g / b).exp2();
                assert!((lhs - rhs).abs() < 1e-9 * rhs.abs().max(1.0));
            }
        }
    }

    proptest::proptest! {
        #[test]
        fn power_nondecreasing_in_rate(r1 in 1e5f64..1e7, r2 in 1e5f64..1e7) {
            let link = RadioLink {
                bandwidth_hz: 180e3,
                noise_w: 1e-11,
                path_loss_exponent: 4.0,
                distance_m: 200.0,
                gain_sq: 1.3,
                interferers: vec![],
            };
            let (lo, hi) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
            proptest::prop_assert!(link.transmit_power_w(lo).unwrap() <= link.transmit_power_w(hi).unwrap());
        }
    }
}
