//! Uniform proration of the long side of a cleared book.

use super::ClearingError;
use crate::market::Qty;

/// Reduces `quantities` by exactly `excess` in total, spreading the
/// reduction as uniformly as possible over the still-positive entries.
///
/// A uniform reduction can drive small participants negative; those are
/// clamped at zero and the unabsorbed shortfall is redistributed over the
/// remaining positive entries (water-filling), iterating until the excess
/// is exhausted. Integer arithmetic distributes any indivisible remainder
/// one quantity unit at a time in slot order, so the total removed equals
/// `excess` exactly and the per-entry deviation from the ideal uniform
/// share is below the 1e-9 kWh tolerance.
pub fn prorate_uniform(quantities: &mut [Qty], excess: Qty) -> Result<(), ClearingError> {
    if excess.is_zero() {
        return Ok(());
    }
    let total: i64 = quantities.iter().map(|q| q.units()).sum();
    if excess.units() > total {
        return Err(ClearingError::InternalInvariantViolation(format!(
            "proration excess {} exceeds cleared total {}",
            excess.as_kwh(),
            Qty::from_units(total).as_kwh()
        )));
    }
    let mut remaining = excess.units();
    while remaining > 0 {
        let positive = quantities.iter().filter(|q| q.units() > 0).count() as i64;
        debug_assert!(positive > 0, "remaining excess with no positive entries");
        let share = remaining / positive;
        let mut leftover = remaining % positive;
        let before = remaining;
        for q in quantities.iter_mut() {
            if q.units() == 0 {
                continue;
            }
            let mut want = share;
            if leftover > 0 {
                want += 1;
                leftover -= 1;
            }
            let take = want.min(q.units());
            *q = Qty::from_units(q.units() - take);
            remaining -= take;
        }
        // Each pass either exhausts the excess or zeroes an entry.
        debug_assert!(remaining < before || remaining == 0);
    }
    Ok(())
}
