//! Scenario types and the per-realization link math.
//!
//! Two single-antenna users share one downlink. User 1 (near) receives the
//! fraction `alpha` of the transmit power and user 2 (far) the rest. Each
//! user runs successive interference cancellation in the sequence given by
//! a [`DecodingOrder`] and may eavesdrop on the other user's signal. After a
//! signal has been cancelled, a fraction `beta` of its power remains as
//! residual interference.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Index of one of the two users.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum User {
    /// User 1, closer to the base station.
    Near,
    /// User 2.
    Far,
}

impl User {
    pub const BOTH: [User; 2] = [User::Near, User::Far];

    /// 1 for the near user, 2 for the far user.
    pub fn index(self) -> u8 {
        match self {
            User::Near => 1,
            User::Far => 2,
        }
    }

    pub fn from_index(index: u8) -> Result<Self> {
        match index {
            1 => Ok(User::Near),
            2 => Ok(User::Far),
            other => Err(Error::domain(format!("user index must be 1 or 2, got {other}"))),
        }
    }

    pub fn other(self) -> Self {
        match self {
            User::Near => User::Far,
            User::Far => User::Near,
        }
    }
}

impl fmt::Display for User {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "U{}", self.index())
    }
}

/// SIC stage at which a receiver decodes a given signal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    First,
    Second,
}

/// One of the four SIC decoding orders of the two-user system.
///
/// `sequence()[m][k]` is the user whose signal receiver `m + 1` decodes at
/// stage `k + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DecodingOrder {
    /// `[2,1; 2,1]`: both users decode the far user's signal first
    /// (conventional NOMA).
    D1,
    /// `[2,1; 1,2]`: each user decodes the other user's signal first.
    D2,
    /// `[1,2; 2,1]`: each user decodes its own signal first.
    D3,
    /// `[1,2; 1,2]`: both users decode the near user's signal first.
    D4,
}

impl DecodingOrder {
    pub const ALL: [DecodingOrder; 4] = [
        DecodingOrder::D1,
        DecodingOrder::D2,
        DecodingOrder::D3,
        DecodingOrder::D4,
    ];

    /// Per-receiver SIC sequences as user indices.
    pub fn sequence(self) -> [[u8; 2]; 2] {
        match self {
            DecodingOrder::D1 => [[2, 1], [2, 1]],
            DecodingOrder::D2 => [[2, 1], [1, 2]],
            DecodingOrder::D3 => [[1, 2], [2, 1]],
            DecodingOrder::D4 => [[1, 2], [1, 2]],
        }
    }

    /// Stage at which `receiver` decodes the signal intended for `signal`.
    pub fn stage(self, receiver: User, signal: User) -> Stage {
        let column = self.sequence()[usize::from(receiver.index() - 1)];
        if column[0] == signal.index() {
            Stage::First
        } else {
            Stage::Second
        }
    }

    /// The orders with closed-form SOP expressions.
    pub fn has_analytic(self) -> bool {
        matches!(self, DecodingOrder::D1 | DecodingOrder::D2)
    }
}

impl fmt::Display for DecodingOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            DecodingOrder::D1 => "D1",
            DecodingOrder::D2 => "D2",
            DecodingOrder::D3 => "D3",
            DecodingOrder::D4 => "D4",
        };
        f.write_str(s)
    }
}

impl FromStr for DecodingOrder {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().replace('_', "").as_str() {
            "D1" | "1" => Ok(DecodingOrder::D1),
            "D2" | "2" => Ok(DecodingOrder::D2),
            "D3" | "3" => Ok(DecodingOrder::D3),
            "D4" | "4" => Ok(DecodingOrder::D4),
            _ => Err(Error::invalid(format!("unknown decoding order `{s}` (expected D1..D4)"))),
        }
    }
}

impl Serialize for DecodingOrder {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for DecodingOrder {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Mean channel power gain `L_p * d^-e` at distance `d`.
pub fn mean_channel_gain(distance: f64, path_loss_constant: f64, path_loss_exponent: f64) -> Result<f64> {
    if !(distance > 0.0 && distance.is_finite()) {
        return Err(Error::domain(format!("distance must be positive, got {distance}")));
    }
    if !(path_loss_constant > 0.0 && path_loss_constant.is_finite()) {
        return Err(Error::domain(format!(
            "path loss constant must be positive, got {path_loss_constant}"
        )));
    }
    if !path_loss_exponent.is_finite() {
        return Err(Error::domain("path loss exponent must be finite"));
    }
    Ok(path_loss_constant * distance.powf(-path_loss_exponent))
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

/// Power in watts for a level given in dBm.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    db_to_linear(dbm - 30.0)
}

/// Transmit SNR that yields an average received SNR of `rho_r_db` at the far
/// user, i.e. `rho_r = rho_t * lambda_2`.
pub fn rho_t_from_rho_r(rho_r_db: f64, mean_gain_far: f64) -> Result<f64> {
    if !(mean_gain_far > 0.0) {
        return Err(Error::domain(format!("far-user mean gain must be positive, got {mean_gain_far}")));
    }
    Ok(db_to_linear(rho_r_db) / mean_gain_far)
}

/// Static scenario. All SNRs are linear.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    path_loss_constant: f64,
    path_loss_exponent: f64,
    distance_near: f64,
    distance_far: f64,
    transmit_snr: f64,
    residual_interference: f64,
    mean_gain_near: f64,
    mean_gain_far: f64,
}

impl SystemParams {
    pub fn new(
        path_loss_constant: f64,
        path_loss_exponent: f64,
        distance_near: f64,
        distance_far: f64,
        transmit_snr: f64,
        residual_interference: f64,
    ) -> Result<Self> {
        if !(transmit_snr > 0.0 && transmit_snr.is_finite()) {
            return Err(Error::domain(format!("transmit SNR must be positive, got {transmit_snr}")));
        }
        if !(0.0..=1.0).contains(&residual_interference) {
            return Err(Error::domain(format!(
                "residual interference factor must lie in [0, 1], got {residual_interference}"
            )));
        }
        let mean_gain_near = mean_channel_gain(distance_near, path_loss_constant, path_loss_exponent)?;
        let mean_gain_far = mean_channel_gain(distance_far, path_loss_constant, path_loss_exponent)?;
        Ok(Self {
            path_loss_constant,
            path_loss_exponent,
            distance_near,
            distance_far,
            transmit_snr,
            residual_interference,
            mean_gain_near,
            mean_gain_far,
        })
    }

    /// Builds the scenario from the average received SNR (dB) at the far user.
    pub fn from_received_snr_db(
        path_loss_constant: f64,
        path_loss_exponent: f64,
        distance_near: f64,
        distance_far: f64,
        received_snr_db: f64,
        residual_interference: f64,
    ) -> Result<Self> {
        let mean_gain_far = mean_channel_gain(distance_far, path_loss_constant, path_loss_exponent)?;
        let transmit_snr = rho_t_from_rho_r(received_snr_db, mean_gain_far)?;
        Self::new(
            path_loss_constant,
            path_loss_exponent,
            distance_near,
            distance_far,
            transmit_snr,
            residual_interference,
        )
    }

    pub fn path_loss_constant(&self) -> f64 {
        self.path_loss_constant
    }

    pub fn path_loss_exponent(&self) -> f64 {
        self.path_loss_exponent
    }

    pub fn distance_near(&self) -> f64 {
        self.distance_near
    }

    pub fn distance_far(&self) -> f64 {
        self.distance_far
    }

    /// `rho_t = P_t / sigma^2`.
    pub fn transmit_snr(&self) -> f64 {
        self.transmit_snr
    }

    pub fn residual_interference(&self) -> f64 {
        self.residual_interference
    }

    /// `lambda_1`.
    pub fn mean_gain_near(&self) -> f64 {
        self.mean_gain_near
    }

    /// `lambda_2`.
    pub fn mean_gain_far(&self) -> f64 {
        self.mean_gain_far
    }

    pub fn mean_gain(&self, user: User) -> f64 {
        match user {
            User::Near => self.mean_gain_near,
            User::Far => self.mean_gain_far,
        }
    }

    /// Average received SNR at the far user, `rho_t * lambda_2`.
    pub fn received_snr(&self) -> f64 {
        self.transmit_snr * self.mean_gain_far
    }

    pub fn with_distances(&self, distance_near: f64, distance_far: f64) -> Result<Self> {
        Self::new(
            self.path_loss_constant,
            self.path_loss_exponent,
            distance_near,
            distance_far,
            self.transmit_snr,
            self.residual_interference,
        )
    }

    pub fn with_distance_far(&self, distance_far: f64) -> Result<Self> {
        self.with_distances(self.distance_near, distance_far)
    }

    pub fn with_transmit_snr(&self, transmit_snr: f64) -> Result<Self> {
        Self::new(
            self.path_loss_constant,
            self.path_loss_exponent,
            self.distance_near,
            self.distance_far,
            transmit_snr,
            self.residual_interference,
        )
    }

    pub fn with_received_snr_db(&self, received_snr_db: f64) -> Result<Self> {
        self.with_transmit_snr(rho_t_from_rho_r(received_snr_db, self.mean_gain_far)?)
    }

    pub fn with_residual_interference(&self, beta: f64) -> Result<Self> {
        Self::new(
            self.path_loss_constant,
            self.path_loss_exponent,
            self.distance_near,
            self.distance_far,
            self.transmit_snr,
            beta,
        )
    }
}

/// One draw of the two channel power gains.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelRealization {
    /// `|h_1|^2`
    pub gain_near: f64,
    /// `|h_2|^2`
    pub gain_far: f64,
}

impl ChannelRealization {
    pub fn new(gain_near: f64, gain_far: f64) -> Result<Self> {
        for (name, g) in [("near", gain_near), ("far", gain_far)] {
            if !(g >= 0.0 && g.is_finite()) {
                return Err(Error::domain(format!("{name} channel gain must be finite and >= 0, got {g}")));
            }
        }
        Ok(Self { gain_near, gain_far })
    }

    pub fn gain(&self, user: User) -> f64 {
        match user {
            User::Near => self.gain_near,
            User::Far => self.gain_far,
        }
    }
}

/// Threshold secrecy rates in bits/s/Hz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecrecyTargets {
    threshold_near: f64,
    threshold_far: f64,
}

impl SecrecyTargets {
    pub fn new(threshold_near: f64, threshold_far: f64) -> Result<Self> {
        for (name, t) in [("near", threshold_near), ("far", threshold_far)] {
            if !(t >= 0.0 && t.is_finite()) {
                return Err(Error::domain(format!("{name} secrecy threshold must be finite and >= 0, got {t}")));
            }
        }
        Ok(Self { threshold_near, threshold_far })
    }

    pub fn threshold_near(&self) -> f64 {
        self.threshold_near
    }

    pub fn threshold_far(&self) -> f64 {
        self.threshold_far
    }

    pub fn threshold(&self, user: User) -> f64 {
        match user {
            User::Near => self.threshold_near,
            User::Far => self.threshold_far,
        }
    }

    /// `Pi_1 = 2^{R_s1^th}`.
    pub fn pi_near(&self) -> f64 {
        self.threshold_near.exp2()
    }

    /// `Pi_2 = 2^{R_s2^th}`.
    pub fn pi_far(&self) -> f64 {
        self.threshold_far.exp2()
    }
}

/// `Gamma_nm`: SINR of user n's signal when decoded at user m.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinrSet {
    /// `Gamma_11`
    pub near_at_near: f64,
    /// `Gamma_12`
    pub near_at_far: f64,
    /// `Gamma_21`
    pub far_at_near: f64,
    /// `Gamma_22`
    pub far_at_far: f64,
}

impl SinrSet {
    pub fn get(&self, signal: User, receiver: User) -> f64 {
        match (signal, receiver) {
            (User::Near, User::Near) => self.near_at_near,
            (User::Near, User::Far) => self.near_at_far,
            (User::Far, User::Near) => self.far_at_near,
            (User::Far, User::Far) => self.far_at_far,
        }
    }
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("power allocation alpha must lie in (0, 1), got {alpha}")))
    }
}

/// SINRs of all four links under `order` with linear imperfect SIC.
pub fn sinr_set(order: DecodingOrder, ch: &ChannelRealization, alpha: f64, params: &SystemParams) -> Result<SinrSet> {
    check_alpha(alpha)?;
    Ok(sinr_set_unchecked(order, ch, alpha, params))
}

pub(crate) fn sinr_set_unchecked(
    order: DecodingOrder,
    ch: &ChannelRealization,
    alpha: f64,
    params: &SystemParams,
) -> SinrSet {
    let inv_snr = params.transmit_snr.recip();
    let beta = params.residual_interference;
    let fraction = |u: User| match u {
        User::Near => alpha,
        User::Far => 1.0 - alpha,
    };
    let link = |signal: User, receiver: User| {
        let g = ch.gain(receiver);
        let interferer = fraction(signal.other()) * g;
        let interference = match order.stage(receiver, signal) {
            Stage::First => interferer,
            Stage::Second => beta * interferer,
        };
        fraction(signal) * g / (interference + inv_snr)
    };
    SinrSet {
        near_at_near: link(User::Near, User::Near),
        near_at_far: link(User::Near, User::Far),
        far_at_near: link(User::Far, User::Near),
        far_at_far: link(User::Far, User::Far),
    }
}

/// `R_nm = log2(1 + Gamma_nm)` for the four links.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DataRates {
    pub near_at_near: f64,
    pub near_at_far: f64,
    pub far_at_near: f64,
    pub far_at_far: f64,
}

/// Secrecy rates in bits/s/Hz. Negative values are kept as-is.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecrecyRates {
    /// `R_s1 = R_11 - R_12`
    pub rate_near: f64,
    /// `R_s2 = R_22 - R_21`
    pub rate_far: f64,
    pub data_rates: DataRates,
}

impl SecrecyRates {
    pub fn rate(&self, user: User) -> f64 {
        match user {
            User::Near => self.rate_near,
            User::Far => self.rate_far,
        }
    }
}

pub fn secrecy_rates(sinrs: &SinrSet) -> SecrecyRates {
    let r = |g: f64| g.ln_1p() / std::f64::consts::LN_2;
    let data_rates = DataRates {
        near_at_near: r(sinrs.near_at_near),
        near_at_far: r(sinrs.near_at_far),
        far_at_near: r(sinrs.far_at_near),
        far_at_far: r(sinrs.far_at_far),
    };
    SecrecyRates {
        rate_near: data_rates.near_at_near - data_rates.near_at_far,
        rate_far: data_rates.far_at_far - data_rates.far_at_near,
        data_rates,
    }
}

/// Interval of `alpha` giving positive secrecy rates to both users under D2.
///
/// Returns `(lower, upper)` with `upper = 1 + lower`; the usable interval is
/// its intersection with `(0, 1)`.
pub fn pa_bounds(ch: &ChannelRealization, params: &SystemParams) -> Result<(f64, f64)> {
    let (near, far) = (ch.gain_near, ch.gain_far);
    if near < far {
        return Err(Error::OrderingViolation { near, far });
    }
    if !(far > 0.0) {
        return Err(Error::domain("far-user gain must be positive for PA bounds"));
    }
    let beta = params.residual_interference;
    if beta >= 1.0 {
        return Err(Error::degenerate("PA bounds are undefined for beta = 1"));
    }
    let lower = (near - far) / (near * far * params.transmit_snr * (1.0 - beta));
    Ok((lower, 1.0 + lower))
}
