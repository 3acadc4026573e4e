//! Variance-balancing allocation of durations to places.
//!
//! Items are taken in non-increasing order and each one is added to a place
//! that currently has the minimum load. Places may start with fixed initial
//! loads. An exhaustive oracle is provided for checking the rule on small
//! instances.

use thiserror::Error;

use crate::time::Time;

/// Upper bound on `m^n` assignments the exhaustive oracle will enumerate.
pub const ORACLE_LIMIT: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BalanceError {
    #[error("at least one place is required")]
    NoPlaces,
    #[error("initial loads have length {got}, expected {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("item {index} has non-positive duration {value}")]
    NonPositiveItem { index: usize, value: Time },
    #[error("place {index} has negative load {value}")]
    NegativeLoad { index: usize, value: Time },
    #[error("{places}^{items} assignments exceed the oracle limit of {ORACLE_LIMIT}")]
    OracleCapacity { places: usize, items: usize },
}

/// Accumulated load per place.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LoadVector(Vec<Time>);

impl LoadVector {
    pub fn new(loads: Vec<Time>) -> Result<Self, BalanceError> {
        if loads.is_empty() {
            return Err(BalanceError::NoPlaces);
        }
        if let Some((index, value)) = loads.iter().enumerate().find(|(_, t)| t.is_negative()) {
            return Err(BalanceError::NegativeLoad {
                index,
                value: *value,
            });
        }
        Ok(LoadVector(loads))
    }

    pub fn zeros(places: usize) -> Result<Self, BalanceError> {
        Self::new(vec![Time::ZERO; places])
    }

    pub fn from_secs(loads: &[i64]) -> Result<Self, BalanceError> {
        Self::new(loads.iter().map(|s| Time::from_secs(*s)).collect())
    }

    pub fn places(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[Time] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<Time> {
        self.0
    }

    pub fn total(&self) -> Time {
        self.0.iter().sum()
    }

    pub fn max(&self) -> Time {
        *self.0.iter().max().expect("non-empty")
    }

    pub fn min(&self) -> Time {
        *self.0.iter().min().expect("non-empty")
    }

    /// Lowest index holding the minimum load.
    pub fn argmin(&self) -> usize {
        argmin(&self.0)
    }

    pub fn variance(&self) -> f64 {
        variance(&self.0)
    }

    pub fn scaled_variance(&self) -> i128 {
        scaled_variance(&self.0)
    }
}

/// Result of an allocation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Assignment {
    /// Place chosen for each input item, indexed like the input.
    pub place_of: Vec<usize>,
    /// Input indices in the order they were placed.
    pub order: Vec<usize>,
    pub loads: LoadVector,
}

impl Assignment {
    pub fn makespan(&self) -> Time {
        self.loads.max()
    }
}

fn argmin(loads: &[Time]) -> usize {
    let mut best = 0;
    for (i, l) in loads.iter().enumerate() {
        if *l < loads[best] {
            best = i;
        }
    }
    best
}

/// `m * Σx² − (Σx)²`, which equals `m²` times the population variance, in
/// squared milliseconds. Exact for all inputs the crate produces.
pub fn scaled_variance(loads: &[Time]) -> i128 {
    let m = loads.len() as i128;
    let (sum, sum_sq) = loads.iter().fold((0i128, 0i128), |(s, sq), t| {
        let x = i128::from(t.millis());
        (s + x, sq + x * x)
    });
    m * sum_sq - sum * sum
}

/// Population variance `(1/m) Σ (x − μ)²` in seconds². Zero for an empty slice.
pub fn variance(loads: &[Time]) -> f64 {
    if loads.is_empty() {
        return 0.0;
    }
    let m = loads.len() as f64;
    scaled_variance(loads) as f64 / (m * m) / 1e6
}

fn check_items(items: &[Time]) -> Result<(), BalanceError> {
    match items.iter().enumerate().find(|(_, t)| !t.is_positive()) {
        Some((index, value)) => Err(BalanceError::NonPositiveItem {
            index,
            value: *value,
        }),
        None => Ok(()),
    }
}

fn check_places(places: usize, initial: &LoadVector) -> Result<(), BalanceError> {
    if places == 0 {
        return Err(BalanceError::NoPlaces);
    }
    if initial.places() != places {
        return Err(BalanceError::LengthMismatch {
            expected: places,
            got: initial.places(),
        });
    }
    Ok(())
}

/// Allocates `items` over `places` places starting from `initial` loads.
///
/// Items are visited in non-increasing order (equal items keep input order)
/// and each goes to the lowest-indexed place with minimal current load.
pub fn balance_allocate(
    items: &[Time],
    places: usize,
    initial: &LoadVector,
) -> Result<Assignment, BalanceError> {
    check_places(places, initial)?;
    check_items(items)?;

    let mut order: Vec<usize> = (0..items.len()).collect();
    order.sort_by(|a, b| items[*b].cmp(&items[*a]));

    let mut loads = initial.as_slice().to_vec();
    let mut place_of = vec![0; items.len()];
    for &i in &order {
        let p = argmin(&loads);
        loads[p] += items[i];
        place_of[i] = p;
    }
    Ok(Assignment {
        place_of,
        order,
        loads: LoadVector(loads),
    })
}

/// Global optima found by exhaustive enumeration.
#[derive(Clone, Debug, PartialEq)]
pub struct OracleResult {
    pub min_variance: f64,
    pub min_scaled_variance: i128,
    pub variance_witness: Assignment,
    pub min_makespan: Time,
    pub makespan_witness: Assignment,
}

/// Enumerates all `places^items` assignments and returns the minimum
/// variance and minimum makespan, each with the first witness found.
pub fn brute_force_oracle(
    items: &[Time],
    places: usize,
    initial: &LoadVector,
) -> Result<OracleResult, BalanceError> {
    check_places(places, initial)?;
    check_items(items)?;
    let capacity = u32::try_from(items.len())
        .ok()
        .and_then(|n| (places as u64).checked_pow(n))
        .filter(|count| *count <= ORACLE_LIMIT);
    if capacity.is_none() {
        return Err(BalanceError::OracleCapacity {
            places,
            items: items.len(),
        });
    }

    // Odometer over place indices; everything starts on place 0.
    let mut digits = vec![0usize; items.len()];
    let mut loads = initial.as_slice().to_vec();
    loads[0] += items.iter().sum::<Time>();

    let snapshot = |digits: &[usize], loads: &[Time]| Assignment {
        place_of: digits.to_vec(),
        order: (0..digits.len()).collect(),
        loads: LoadVector(loads.to_vec()),
    };

    let mut best_var = scaled_variance(&loads);
    let mut var_witness = snapshot(&digits, &loads);
    let mut best_span = *loads.iter().max().expect("non-empty");
    let mut span_witness = var_witness.clone();

    'outer: loop {
        let mut i = 0;
        loop {
            if i == digits.len() {
                break 'outer;
            }
            let from = digits[i];
            let to = if from + 1 == places { 0 } else { from + 1 };
            loads[from] -= items[i];
            loads[to] += items[i];
            digits[i] = to;
            if to != 0 {
                break;
            }
            i += 1;
        }
        let var = scaled_variance(&loads);
        if var < best_var {
            best_var = var;
            var_witness = snapshot(&digits, &loads);
        }
        let span = *loads.iter().max().expect("non-empty");
        if span < best_span {
            best_span = span;
            span_witness = snapshot(&digits, &loads);
        }
    }

    let m = places as f64;
    Ok(OracleResult {
        min_variance: best_var as f64 / (m * m) / 1e6,
        min_scaled_variance: best_var,
        variance_witness: var_witness,
        min_makespan: best_span,
        makespan_witness: span_witness,
    })
}
