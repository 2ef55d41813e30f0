use crate::error::{Error, Result};
use crate::neural::{LayerSpec, NetworkSpec};
use crate::Scalar;

/// Integer unit counts for a network-specific engine.
#[derive(Clone, Debug, PartialEq)]
pub struct Allocation {
    pub units: Vec<u64>,
    pub multiplicity: Vec<u64>,
    pub total: u64,
    /// Real-valued stationary point before rounding.
    pub continuous: Vec<f64>,
    /// `sum_j alpha_j M_j / C_j` in cycles.
    pub latency: f64,
}

/// Stationary point of `sum a_j M_j / C_j` under `sum a_j C_j = C`:
/// `C_j = C sqrt(M_j) / sum_i a_i sqrt(M_i)`.
pub fn continuous_allocation<S: Scalar>(work: &[S], multiplicity: &[S], total: S) -> Vec<S> {
    let denom = work
        .iter()
        .zip(multiplicity)
        .fold(S::zero(), |acc, (&m, &a)| acc + a * m.sqrt());
    work.iter().map(|&m| total * m.sqrt() / denom).collect()
}

pub fn allocation_latency(work: &[u64], multiplicity: &[u64], units: &[u64]) -> f64 {
    work.iter()
        .zip(multiplicity)
        .zip(units)
        .map(|((&m, &a), &c)| a as f64 * m as f64 / c as f64)
        .sum()
}

// Above this many DP cell updates the rounding heuristic is used instead.
const DP_BUDGET: u128 = 200_000_000;

/// Splits `total` units over layers with `multiplicity[j]` copies of
/// `work[j]` multiplies each, minimising the summed layer latency.
pub fn allocate(work: &[u64], multiplicity: &[u64], total: u64) -> Result<Allocation> {
    if work.is_empty() || work.len() != multiplicity.len() {
        return Err(Error::InvalidArgument("work and multiplicity must be non-empty and equal length".into()));
    }
    if work.contains(&0) || multiplicity.contains(&0) {
        return Err(Error::InvalidArgument("work and multiplicity must be positive".into()));
    }
    let floor: u64 = multiplicity.iter().sum();
    if total < floor {
        return Err(Error::InfeasibleAllocation(format!(
            "{total} units cannot give one to each of {floor} layer copies"
        )));
    }
    let m: Vec<f64> = work.iter().map(|&v| v as f64).collect();
    let a: Vec<f64> = multiplicity.iter().map(|&v| v as f64).collect();
    let continuous = continuous_allocation(&m, &a, total as f64);
    let cells = work.len() as u128 * total as u128 * total as u128;
    let units = if cells <= DP_BUDGET {
        exact_units(work, multiplicity, total)
    } else {
        rounded_units(&continuous, multiplicity, total)
    }
    .ok_or_else(|| {
        Error::InfeasibleAllocation(format!("no integer split of {total} matches the multiplicities exactly"))
    })?;
    let latency = allocation_latency(work, multiplicity, &units);
    Ok(Allocation {
        units,
        multiplicity: multiplicity.to_vec(),
        total,
        continuous,
        latency,
    })
}

/// Minimum over all integer splits, by DP over the spent budget.
fn exact_units(work: &[u64], multiplicity: &[u64], total: u64) -> Option<Vec<u64>> {
    let n = work.len();
    let b = total as usize;
    let mut best = vec![f64::INFINITY; b + 1];
    best[0] = 0.0;
    let mut picks: Vec<Vec<u32>> = Vec::with_capacity(n);
    for j in 0..n {
        let a = multiplicity[j] as usize;
        let cost = work[j] as f64 * multiplicity[j] as f64;
        let mut next = vec![f64::INFINITY; b + 1];
        let mut pick = vec![0u32; b + 1];
        for spent in 0..=b {
            if !best[spent].is_finite() {
                continue;
            }
            let mut c = 1;
            while spent + a * c <= b {
                let v = best[spent] + cost / c as f64;
                let to = spent + a * c;
                if v < next[to] {
                    next[to] = v;
                    pick[to] = c as u32;
                }
                c += 1;
            }
        }
        best = next;
        picks.push(pick);
    }
    if !best[b].is_finite() {
        return None;
    }
    let mut units = vec![0u64; n];
    let mut spent = b;
    for j in (0..n).rev() {
        let c = picks[j][spent] as u64;
        units[j] = c;
        spent -= multiplicity[j] as usize * c as usize;
    }
    Some(units)
}

/// Largest-remainder rounding of the continuous optimum.
fn rounded_units(continuous: &[f64], multiplicity: &[u64], total: u64) -> Option<Vec<u64>> {
    let mut units: Vec<u64> = continuous.iter().map(|&c| (c.floor() as u64).max(1)).collect();
    let spent = |u: &[u64]| -> u64 { u.iter().zip(multiplicity).map(|(c, a)| c * a).sum() };
    while spent(&units) > total {
        let j = (0..units.len()).filter(|&j| units[j] > 1).max_by(|&x, &y| {
            (units[x] as f64 - continuous[x]).total_cmp(&(units[y] as f64 - continuous[y]))
        })?;
        units[j] -= 1;
    }
    let mut order: Vec<usize> = (0..units.len()).collect();
    order.sort_by(|&x, &y| {
        let rx = continuous[x] - units[x] as f64;
        let ry = continuous[y] - units[y] as f64;
        ry.total_cmp(&rx).then(x.cmp(&y))
    });
    let mut left = total - spent(&units);
    loop {
        let mut moved = false;
        for &j in &order {
            if multiplicity[j] <= left {
                units[j] += 1;
                left -= multiplicity[j];
                moved = true;
            }
            if left == 0 {
                return Some(units);
            }
        }
        if !moved {
            return None;
        }
    }
}

/// Allocation problem of a network: each frontend layer alone, identical
/// head layers merged with their count as multiplicity.
pub fn layer_groups(spec: &NetworkSpec) -> Vec<(String, u64, u64)> {
    let mut groups: Vec<(String, u64, u64)> = spec
        .frontend
        .iter()
        .enumerate()
        .map(|(i, l)| (format!("frontend{i}"), l.multiplications() as u64, 1))
        .collect();
    let mut merge = |name: &str, layers: Vec<LayerSpec>| {
        let mut seen: Vec<(LayerSpec, u64)> = Vec::new();
        for l in layers {
            match seen.iter_mut().find(|(s, _)| *s == l) {
                Some((_, n)) => *n += 1,
                None => seen.push((l, 1)),
            }
        }
        for (k, (l, n)) in seen.into_iter().enumerate() {
            groups.push((format!("{name}{k}"), l.multiplications() as u64, n));
        }
    };
    merge("head_hidden", spec.heads.iter().map(|h| h.hidden).collect());
    merge("head_output", spec.heads.iter().map(|h| h.output).collect());
    groups
}
