//! Password sizing from physical limits on quantum gate speed.
//!
//! An attacker testing one password guess must run a serial chain of gates,
//! so a guess costs at least `ΔT = N_gates · Δt`. Over an attack budget of
//! `D` seconds on `K` machines the attacker tests at most
//! `N = floor(D · K / ΔT)` passwords, and a password of `⌈log₂ N⌉` bits
//! outlasts the budget. All arithmetic is exact over the rationals.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CostError {
    #[error("domain error: {0}")]
    Domain(String),
}

fn ratio(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

fn pow2(k: u32) -> BigRational {
    BigRational::from_integer(BigInt::one() << k)
}

fn pow10(k: i32) -> BigRational {
    let p = BigInt::from(10u8).pow(k.unsigned_abs());
    if k >= 0 {
        BigRational::from_integer(p)
    } else {
        BigRational::new(BigInt::one(), p)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhysicalParams {
    pub gate_time_s: BigRational,
    pub serial_gates: BigRational,
    pub attack_duration_s: BigRational,
    pub computer_count: BigRational,
}

impl PhysicalParams {
    /// `Δt₁ = 10⁻¹⁴ s`, `N₁ = 10⁴`, one machine, `2³²` seconds.
    pub fn generic() -> Self {
        PhysicalParams {
            gate_time_s: pow10(-14),
            serial_gates: pow10(4),
            attack_duration_s: pow2(32),
            computer_count: BigRational::one(),
        }
    }

    /// `Δt₂ = 2.85·10⁻⁴ s`, `N₂ = 10²`, `2⁴⁹` machines, `2³²` seconds.
    pub fn ion_trap() -> Self {
        PhysicalParams {
            gate_time_s: ratio(285, 1_000_000),
            serial_gates: pow10(2),
            attack_duration_s: pow2(32),
            computer_count: pow2(ION_TRAP_COMPUTER_CAP_LOG2),
        }
    }

    fn check(&self) -> Result<(), CostError> {
        for (name, v) in [
            ("gate time", &self.gate_time_s),
            ("serial gate count", &self.serial_gates),
            ("attack duration", &self.attack_duration_s),
            ("computer count", &self.computer_count),
        ] {
            if !v.is_positive() {
                return Err(CostError::Domain(format!("{name} must be positive")));
            }
        }
        Ok(())
    }
}

/// Upper limit on machines in the ion-trap profile, as a power of two.
pub const ION_TRAP_COMPUTER_CAP_LOG2: u32 = 49;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CostModelReport {
    pub params: PhysicalParams,
    pub per_guess_time_s: BigRational,
    pub guesses_within_budget: BigUint,
    pub min_password_bits: i64,
}

pub fn cost_report(params: PhysicalParams) -> Result<CostModelReport, CostError> {
    params.check()?;
    let per_guess = &params.serial_gates * &params.gate_time_s;
    let budget = &params.attack_duration_s * &params.computer_count / &per_guess;
    let guesses = budget
        .floor()
        .to_integer()
        .to_biguint()
        .expect("positive budget");
    let bits = ceil_log2(&budget);
    Ok(CostModelReport {
        params,
        per_guess_time_s: per_guess,
        guesses_within_budget: guesses,
        min_password_bits: bits,
    })
}

pub fn generic_gate_bound() -> CostModelReport {
    cost_report(PhysicalParams::generic()).expect("defaults are positive")
}

pub fn ion_trap_bound() -> Result<CostModelReport, CostError> {
    ion_trap_bound_with(PhysicalParams::ion_trap())
}

/// Ion-trap report with caller overrides; the computer count may not exceed
/// the planetary cap.
pub fn ion_trap_bound_with(params: PhysicalParams) -> Result<CostModelReport, CostError> {
    if params.computer_count > pow2(ION_TRAP_COMPUTER_CAP_LOG2) {
        return Err(CostError::Domain(format!(
            "more than 2^{ION_TRAP_COMPUTER_CAP_LOG2} machines exceeds the planetary cap"
        )));
    }
    cost_report(params)
}

/// `⌈log₂(duration · computers / per_guess)⌉`.
pub fn min_password_bits(
    attack_duration_s: &BigRational,
    per_guess_time_s: &BigRational,
    computer_count: &BigRational,
) -> Result<i64, CostError> {
    if !attack_duration_s.is_positive()
        || !per_guess_time_s.is_positive()
        || !computer_count.is_positive()
    {
        return Err(CostError::Domain("inputs must be positive".into()));
    }
    Ok(ceil_log2(
        &(attack_duration_s * computer_count / per_guess_time_s),
    ))
}

/// Smallest `k` with `2^k >= x`, for positive rational `x`.
fn ceil_log2(x: &BigRational) -> i64 {
    let (num, den) = (x.numer().magnitude().clone(), x.denom().magnitude().clone());
    // start from the bit-length estimate and correct by at most a step
    let mut k = num.bits() as i64 - den.bits() as i64;
    let holds = |k: i64| -> bool {
        if k >= 0 {
            &den << (k as u64) >= num
        } else {
            den >= &num << ((-k) as u64)
        }
    };
    while !holds(k) {
        k += 1;
    }
    while holds(k - 1) {
        k -= 1;
    }
    k
}

/// `4πr²` for the earth's radius, bracketed with rational bounds on π.
pub fn planetary_surface_bounds() -> (BigRational, BigRational) {
    let pi_low = ratio(314_159_265, 100_000_000);
    let pi_high = ratio(314_159_266, 100_000_000);
    let r = BigRational::from_integer(BigInt::from(6_370_000));
    let four_r2 = BigRational::from_integer(BigInt::from(4)) * &r * &r;
    (&four_r2 * pi_low, four_r2 * pi_high)
}

/// `x` rounded to `sig` significant digits, as `d.ddde±k` with trailing
/// zeros dropped.
pub fn sci(x: &BigRational, sig: u32) -> String {
    if x.is_zero() {
        return "0".into();
    }
    let neg = x.is_negative();
    let x = x.abs();
    let mut exp = ceil_log10(&x) - 1;
    let mut digits = round_scaled(&x, sig as i32 - 1 - exp);
    if digits >= BigInt::from(10u8).pow(sig) {
        exp += 1;
        digits = round_scaled(&x, sig as i32 - 1 - exp);
    }
    let s = digits.to_string();
    let (head, tail) = s.split_at(1);
    let tail = tail.trim_end_matches('0');
    let mantissa = if tail.is_empty() {
        head.to_string()
    } else {
        format!("{head}.{tail}")
    };
    let sign = if neg { "-" } else { "" };
    if exp == 0 {
        format!("{sign}{mantissa}")
    } else {
        format!("{sign}{mantissa}e{exp}")
    }
}

fn ceil_log10(x: &BigRational) -> i32 {
    // smallest k with 10^k > x, minus nothing: used as exponent + 1
    let mut k = 0i32;
    while &pow10(k) <= x {
        k += 1;
    }
    while &pow10(k - 1) > x {
        k -= 1;
    }
    k
}

fn round_scaled(x: &BigRational, shift: i32) -> BigInt {
    let scaled = x * pow10(shift);
    let (q, r) = scaled.numer().div_rem(scaled.denom());
    if BigInt::from(2u8) * r >= *scaled.denom() {
        q + 1
    } else {
        q
    }
}

/// One line of the comparison table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckRow {
    pub parameter: String,
    pub reference: String,
    pub computed: String,
    pub matches: bool,
}

impl fmt::Display for CheckRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:<44} {:>16} {:>22}  {}",
            self.parameter,
            self.reference,
            self.computed,
            if self.matches { "yes" } else { "NO" }
        )
    }
}

fn row(parameter: &str, reference: &str, computed: String, matches: bool) -> CheckRow {
    CheckRow {
        parameter: parameter.into(),
        reference: reference.into(),
        computed,
        matches,
    }
}

/// Recommended length in the generic profile: the minimum plus two bits.
pub const GENERIC_MARGIN_BITS: i64 = 2;
/// Length chosen in the ion-trap profile.
pub const ION_TRAP_CHOSEN_BITS: i64 = 88;

pub fn generic_rows() -> Vec<CheckRow> {
    let r = generic_gate_bound();
    let n = BigRational::from_integer(BigInt::from(r.guesses_within_budget.clone()));
    let recommended = r.min_password_bits + GENERIC_MARGIN_BITS;
    vec![
        row(
            "per-guess time dT1 (s)",
            "1e-10",
            sci(&r.per_guess_time_s, 6),
            r.per_guess_time_s == pow10(-10),
        ),
        row(
            "guesses in 2^32 s, one machine",
            "< 2^66",
            format!("{} (2^{:.2})", sci(&n, 4), log2_approx(&n)),
            n < pow2(66),
        ),
        row(
            "minimum password bits",
            "66",
            r.min_password_bits.to_string(),
            r.min_password_bits == 66,
        ),
        row(
            "recommended password bits",
            "68",
            recommended.to_string(),
            recommended == 68,
        ),
    ]
}

pub fn ion_trap_rows() -> Vec<CheckRow> {
    let r = ion_trap_bound().expect("defaults are within the cap");
    let per_second = BigRational::one() / &r.per_guess_time_s;
    let per_machine = pow2(32) / &r.per_guess_time_s;
    let n = BigRational::from_integer(BigInt::from(r.guesses_within_budget.clone()));
    let (area_low, area_high) = planetary_surface_bounds();
    let area_ref = ratio(51, 1) * pow10(13);
    vec![
        row(
            "per-guess time dT2 (s)",
            "2.85e-2",
            sci(&r.per_guess_time_s, 6),
            r.per_guess_time_s == ratio(285, 10_000),
        ),
        row(
            "guesses per second per machine",
            "< 2^6",
            sci(&per_second, 4),
            per_second < pow2(6),
        ),
        row(
            "guesses per machine in 2^32 s",
            "< 2^38",
            format!(
                "{} (2^{:.2})",
                sci(&per_machine, 4),
                log2_approx(&per_machine)
            ),
            per_machine < pow2(38),
        ),
        row(
            "planet surface 4*pi*(6370 km)^2 (m^2)",
            "5.1e14",
            sci(&area_low, 2),
            sci(&area_low, 2) == sci(&area_ref, 2) && sci(&area_high, 2) == sci(&area_ref, 2),
        ),
        row(
            "machine cap",
            "< 2^49",
            format!("{} < {}", sci(&area_high, 4), sci(&pow2(49), 4)),
            area_high < pow2(49),
        ),
        row(
            "guesses in 2^32 s, 2^49 machines",
            "< 2^87",
            format!("{} (2^{:.2})", sci(&n, 4), log2_approx(&n)),
            n < pow2(87),
        ),
        row(
            "minimum password bits",
            "87",
            r.min_password_bits.to_string(),
            r.min_password_bits == 87,
        ),
        row(
            "chosen password bits",
            "88",
            ION_TRAP_CHOSEN_BITS.to_string(),
            ION_TRAP_CHOSEN_BITS > r.min_password_bits && ION_TRAP_CHOSEN_BITS == 88,
        ),
    ]
}

fn log2_approx(x: &BigRational) -> f64 {
    let n = x.numer().to_f64().unwrap_or(f64::MAX);
    let d = x.denom().to_f64().unwrap_or(f64::MAX);
    n.log2() - d.log2()
}

/// Duration of `2^32` seconds in Julian years.
pub fn attack_duration_years() -> BigRational {
    pow2(32) / BigRational::from_integer(BigInt::from(36_525u32 * 864))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generic_profile() {
        let r = generic_gate_bound();
        assert_eq!(r.per_guess_time_s, pow10(-10));
        assert_eq!(
            r.guesses_within_budget,
            BigUint::from(42_949_672_960_000_000_000u128)
        );
        assert_eq!(r.min_password_bits, 66);
        assert!(generic_rows().iter().all(|r| r.matches));
    }

    #[test]
    fn ion_trap_profile() {
        let r = ion_trap_bound().unwrap();
        assert_eq!(r.per_guess_time_s, ratio(57, 2000));
        assert_eq!(r.min_password_bits, 87);
        assert!(
            ion_trap_rows().iter().all(|r| r.matches),
            "{:#?}",
            ion_trap_rows()
        );
    }

    #[test]
    fn min_bits_examples() {
        assert_eq!(
            min_password_bits(&pow2(32), &pow10(-10), &BigRational::one()).unwrap(),
            66
        );
        assert_eq!(
            min_password_bits(&pow2(32), &ratio(285, 10_000), &pow2(49)).unwrap(),
            87
        );
        let one = BigRational::one();
        assert_eq!(min_password_bits(&one, &one, &one).unwrap(), 0);
        assert!(min_password_bits(&BigRational::zero(), &one, &one).is_err());
        assert!(min_password_bits(&one, &ratio(-1, 1), &one).is_err());
    }

    #[test]
    fn ceil_log2_edges() {
        assert_eq!(ceil_log2(&pow2(10)), 10);
        assert_eq!(ceil_log2(&(pow2(10) + ratio(1, 1000))), 11);
        assert_eq!(ceil_log2(&ratio(1, 2)), -1);
        assert_eq!(ceil_log2(&ratio(3, 4)), 0);
    }

    #[test]
    fn overrides_and_domain() {
        let mut p = PhysicalParams::ion_trap();
        p.computer_count = pow2(50);
        assert!(ion_trap_bound_with(p).is_err());
        let mut p = PhysicalParams::generic();
        p.gate_time_s = BigRational::zero();
        assert!(cost_report(p).is_err());
    }

    #[test]
    fn scientific_formatting() {
        assert_eq!(sci(&pow10(-10), 6), "1e-10");
        assert_eq!(sci(&ratio(285, 10_000), 6), "2.85e-2");
        assert_eq!(sci(&ratio(95, 10), 1), "1e1");
        assert_eq!(sci(&ratio(123, 1), 6), "1.23e2");
        assert_eq!(sci(&ratio(7, 1), 3), "7");
        assert_eq!(sci(&planetary_surface_bounds().0, 2), "5.1e14");
    }

    #[test]
    fn two_to_the_32_seconds_is_about_136_years() {
        let y = attack_duration_years();
        assert!(y > ratio(136, 1) && y < ratio(137, 1));
    }
}
