//! Shared domain types: prices, quantities, money, orders, agents, and
//! market-wide constants.
//!
//! Prices are exact decimal cents (fixed point, tenths of a cent) and
//! quantities are fixed point nano-kWh, so clearing and every budget-balance
//! check run on exact integer arithmetic. Public constructors accept plain
//! f64 cents / kWh and quantize on entry; the quantization error (at most
//! half a nano-kWh) is below the 1e-9 kWh comparison tolerance used
//! throughout.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Price resolution: tenths of a cent per kWh.
pub const PRICE_UNITS_PER_CENT: i64 = 10;
/// Quantity resolution: nano-kWh.
pub const QTY_UNITS_PER_KWH: i64 = 1_000_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MarketError {
    #[error("quantity must be strictly positive")]
    NonPositiveQuantity,
    #[error("price must be non-negative")]
    NegativePrice,
    #[error("value must be finite")]
    NonFinite,
    #[error("invalid market constants: {0}")]
    InvalidConstants(String),
}

/// Energy price in tenths of a cent per kWh.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default,
)]
pub struct Price(i64);

impl Price {
    pub const ZERO: Price = Price(0);

    /// Builds a price from cents, rounding to the nearest tenth of a cent.
    pub fn from_cents(cents: f64) -> Result<Price, MarketError> {
        if !cents.is_finite() {
            return Err(MarketError::NonFinite);
        }
        Ok(Price((cents * PRICE_UNITS_PER_CENT as f64).round() as i64))
    }

    /// Builds a price from a whole number of cents.
    pub fn from_cents_int(cents: i64) -> Price {
        Price(cents * PRICE_UNITS_PER_CENT)
    }

    pub fn from_units(units: i64) -> Price {
        Price(units)
    }

    pub fn units(self) -> i64 {
        self.0
    }

    pub fn as_cents(self) -> f64 {
        self.0 as f64 / PRICE_UNITS_PER_CENT as f64
    }

    pub fn is_negative(self) -> bool {
        self.0 < 0
    }

    /// Exact price-times-quantity product.
    pub fn times(self, quantity: Qty) -> Money {
        Money(self.0 as i128 * quantity.0 as i128)
    }

    /// Exact product against a signed quantity.
    pub fn times_signed(self, quantity: SignedQuantity) -> Money {
        Money(self.0 as i128 * quantity.0 as i128)
    }
}

impl std::ops::Sub for Price {
    type Output = Price;
    fn sub(self, rhs: Price) -> Price {
        Price(self.0 - rhs.0)
    }
}

impl std::ops::Add for Price {
    type Output = Price;
    fn add(self, rhs: Price) -> Price {
        Price(self.0 + rhs.0)
    }
}

impl std::fmt::Display for Price {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:.1}c", self.as_cents())
    }
}

/// Non-negative energy quantity in nano-kWh.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default,
)]
pub struct Qty(i64);

impl Qty {
    pub const ZERO: Qty = Qty(0);

    /// Builds a quantity from kWh, rounding to the nearest nano-kWh.
    pub fn from_kwh(kwh: f64) -> Result<Qty, MarketError> {
        if !kwh.is_finite() {
            return Err(MarketError::NonFinite);
        }
        Ok(Qty((kwh * QTY_UNITS_PER_KWH as f64).round() as i64))
    }

    pub fn from_units(units: i64) -> Qty {
        Qty(units)
    }

    pub fn units(self) -> i64 {
        self.0
    }

    pub fn as_kwh(self) -> f64 {
        self.0 as f64 / QTY_UNITS_PER_KWH as f64
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    pub fn min(self, other: Qty) -> Qty {
        Qty(self.0.min(other.0))
    }

    pub fn saturating_sub(self, other: Qty) -> Qty {
        Qty((self.0 - other.0).max(0))
    }
}

impl std::ops::Add for Qty {
    type Output = Qty;
    fn add(self, rhs: Qty) -> Qty {
        Qty(self.0 + rhs.0)
    }
}

impl std::ops::Sub for Qty {
    type Output = Qty;
    fn sub(self, rhs: Qty) -> Qty {
        Qty(self.0 - rhs.0)
    }
}

impl std::ops::AddAssign for Qty {
    fn add_assign(&mut self, rhs: Qty) {
        self.0 += rhs.0;
    }
}

impl std::iter::Sum for Qty {
    fn sum<I: Iterator<Item = Qty>>(iter: I) -> Qty {
        Qty(iter.map(|q| q.0).sum())
    }
}

/// Signed round quantity: negative for buyers, positive for sellers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SignedQuantity(i64);

impl SignedQuantity {
    pub const ZERO: SignedQuantity = SignedQuantity(0);

    pub fn from_kwh(kwh: f64) -> Result<SignedQuantity, MarketError> {
        if !kwh.is_finite() {
            return Err(MarketError::NonFinite);
        }
        Ok(SignedQuantity(
            (kwh * QTY_UNITS_PER_KWH as f64).round() as i64
        ))
    }

    /// Buyer quantity from a positive demand magnitude.
    pub fn buying(magnitude: Qty) -> SignedQuantity {
        SignedQuantity(-magnitude.0)
    }

    /// Seller quantity from a positive supply magnitude.
    pub fn selling(magnitude: Qty) -> SignedQuantity {
        SignedQuantity(magnitude.0)
    }

    pub fn as_kwh(self) -> f64 {
        self.0 as f64 / QTY_UNITS_PER_KWH as f64
    }

    pub fn units(self) -> i64 {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    pub fn magnitude(self) -> Qty {
        Qty(self.0.abs())
    }

    /// Market side implied by the sign; `None` for a zero quantity.
    pub fn side(self) -> Option<Side> {
        match self.0 {
            0 => None,
            n if n < 0 => Some(Side::Buy),
            _ => Some(Side::Sell),
        }
    }
}

/// Exact monetary amount in units of (tenth of a cent) x (nano-kWh),
/// i.e. 1e-10 cents.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default,
)]
pub struct Money(i128);

impl Money {
    pub const ZERO: Money = Money(0);

    pub fn from_units(units: i128) -> Money {
        Money(units)
    }

    pub fn units(self) -> i128 {
        self.0
    }

    pub fn as_cents(self) -> f64 {
        self.0 as f64 / (PRICE_UNITS_PER_CENT as f64 * QTY_UNITS_PER_KWH as f64)
    }

    pub fn is_negative(self) -> bool {
        self.0 < 0
    }
}

impl std::ops::Add for Money {
    type Output = Money;
    fn add(self, rhs: Money) -> Money {
        Money(self.0 + rhs.0)
    }
}

impl std::ops::Sub for Money {
    type Output = Money;
    fn sub(self, rhs: Money) -> Money {
        Money(self.0 - rhs.0)
    }
}

impl std::ops::Neg for Money {
    type Output = Money;
    fn neg(self) -> Money {
        Money(-self.0)
    }
}

impl std::ops::AddAssign for Money {
    fn add_assign(&mut self, rhs: Money) {
        self.0 += rhs.0;
    }
}

impl std::iter::Sum for Money {
    fn sum<I: Iterator<Item = Money>>(iter: I) -> Money {
        Money(iter.map(|m| m.0).sum())
    }
}

/// Stable agent identifier, dense 0..N-1 at initialization.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default,
)]
pub struct AgentId(pub u32);

impl std::fmt::Display for AgentId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "a{}", self.0)
    }
}

/// Fixed market role of an agent over a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AgentClass {
    PureBuyer,
    PureSeller,
    Prosumer,
}

/// Side of a submitted order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    Buy,
    Sell,
}

/// One agent's price-quantity submission for a round. Quantities are
/// positive magnitudes; `side` carries the direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Order {
    pub agent: AgentId,
    pub side: Side,
    pub price: Price,
    pub quantity: Qty,
}

/// Checks the order invariants clearing relies on: strictly positive
/// quantity and non-negative price. Clearing never mutates orders, so a
/// validated order stays valid.
pub fn validate_order(order: &Order) -> Result<(), MarketError> {
    if order.quantity.units() <= 0 {
        return Err(MarketError::NonPositiveQuantity);
    }
    if order.price.is_negative() {
        return Err(MarketError::NegativePrice);
    }
    Ok(())
}

/// Per-hour demand and supply means of one agent's type.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentTypeProfile {
    pub mean_demand_per_hour: Vec<f64>,
    pub mean_supply_per_hour: Vec<f64>,
}

/// Market-wide constants: the utility retail rate, feed-in tariff, the
/// discrete price arms, and the k-double pricing weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarketConstants {
    pub p_ur: Price,
    pub p_fit: Price,
    pub arm_prices: Vec<Price>,
    pub k: f64,
}

impl MarketConstants {
    pub fn new(
        p_ur: Price,
        p_fit: Price,
        arm_prices: Vec<Price>,
        k: f64,
    ) -> Result<MarketConstants, MarketError> {
        if p_fit >= p_ur {
            return Err(MarketError::InvalidConstants(
                "feed-in tariff must be below the utility rate".into(),
            ));
        }
        if arm_prices.len() < 2 {
            return Err(MarketError::InvalidConstants(
                "need at least two price arms".into(),
            ));
        }
        if !arm_prices.windows(2).all(|w| w[0] < w[1]) {
            return Err(MarketError::InvalidConstants(
                "arm prices must be strictly increasing".into(),
            ));
        }
        if !(0.0..=1.0).contains(&k) || !k.is_finite() {
            return Err(MarketError::InvalidConstants("k must lie in [0, 1]".into()));
        }
        Ok(MarketConstants {
            p_ur,
            p_fit,
            arm_prices,
            k,
        })
    }

    /// Number of price arms M.
    pub fn arm_count(&self) -> usize {
        self.arm_prices.len()
    }

    pub fn price_of_arm(&self, arm: usize) -> Price {
        self.arm_prices[arm]
    }

    /// Inverse of the arm -> price map. The strict ordering of
    /// `arm_prices` makes this a bijection.
    pub fn arm_of_price(&self, price: Price) -> Option<usize> {
        self.arm_prices.binary_search(&price).ok()
    }
}

/// The reference market setup: P_UR = 11 c/kWh, P_FIT = 5 c/kWh, fifteen
/// arms at 0..=14 whole cents, and k = 0.5.
pub fn default_constants() -> MarketConstants {
    MarketConstants::new(
        Price::from_cents_int(11),
        Price::from_cents_int(5),
        (0..=14).map(Price::from_cents_int).collect(),
        0.5,
    )
    .expect("reference constants are valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_constants_match_reference_setup() {
        let c = default_constants();
        assert_eq!(c.p_ur, Price::from_cents_int(11));
        assert_eq!(c.p_fit, Price::from_cents_int(5));
        assert_eq!(c.arm_count(), 15);
        assert_eq!(c.arm_prices[0], Price::from_cents_int(0));
        assert_eq!(c.arm_prices[14], Price::from_cents_int(14));
        assert_eq!(c.k, 0.5);
    }

    #[test]
    fn arm_price_mapping_is_a_bijection() {
        let c = default_constants();
        for m in 0..c.arm_count() {
            assert_eq!(c.arm_of_price(c.price_of_arm(m)), Some(m));
        }
        assert_eq!(c.arm_of_price(Price::from_cents(7.5).unwrap()), None);
    }

    #[test]
    fn validate_order_accepts_well_formed() {
        let order = Order {
            agent: AgentId(0),
            side: Side::Buy,
            price: Price::from_cents_int(8),
            quantity: Qty::from_kwh(2.0).unwrap(),
        };
        assert!(validate_order(&order).is_ok());
    }

    #[test]
    fn validate_order_rejects_zero_quantity() {
        let order = Order {
            agent: AgentId(0),
            side: Side::Buy,
            price: Price::from_cents_int(8),
            quantity: Qty::ZERO,
        };
        assert_eq!(
            validate_order(&order),
            Err(MarketError::NonPositiveQuantity)
        );
    }

    #[test]
    fn validate_order_rejects_negative_price() {
        let order = Order {
            agent: AgentId(1),
            side: Side::Sell,
            price: Price::from_cents_int(-1),
            quantity: Qty::from_kwh(1.0).unwrap(),
        };
        assert_eq!(validate_order(&order), Err(MarketError::NegativePrice));
    }

    #[test]
    fn non_finite_inputs_are_rejected_at_construction() {
        assert_eq!(Price::from_cents(f64::NAN), Err(MarketError::NonFinite));
        assert_eq!(Qty::from_kwh(f64::INFINITY), Err(MarketError::NonFinite));
    }

    #[test]
    fn constants_validation_rejects_bad_inputs() {
        let arms: Vec<Price> = (0..=14).map(Price::from_cents_int).collect();
        // FIT above UR
        assert!(MarketConstants::new(
            Price::from_cents_int(5),
            Price::from_cents_int(11),
            arms.clone(),
            0.5
        )
        .is_err());
        // k out of range
        assert!(MarketConstants::new(
            Price::from_cents_int(11),
            Price::from_cents_int(5),
            arms.clone(),
            1.5
        )
        .is_err());
        // non-increasing arms
        let mut bad = arms;
        bad[3] = bad[4];
        assert!(MarketConstants::new(
            Price::from_cents_int(11),
            Price::from_cents_int(5),
            bad,
            0.5
        )
        .is_err());
    }

    #[test]
    fn signed_quantity_sign_convention() {
        let q = SignedQuantity::buying(Qty::from_kwh(2.0).unwrap());
        assert!(q.units() < 0);
        assert_eq!(q.side(), Some(Side::Buy));
        let q = SignedQuantity::selling(Qty::from_kwh(2.0).unwrap());
        assert!(q.units() > 0);
        assert_eq!(q.side(), Some(Side::Sell));
        assert_eq!(SignedQuantity::ZERO.side(), None);
    }

    #[test]
    fn money_arithmetic_is_exact() {
        let p = Price::from_cents(9.5).unwrap();
        let q = Qty::from_kwh(3.0).unwrap();
        // 9.5 cents x 3 kWh = 28.5 cents, exactly.
        let m = p.times(q);
        assert_eq!(m.units(), 95 * 3_000_000_000);
        assert_eq!(m.as_cents(), 28.5);
    }
}
