use crate::error::{Error, Result};
use crate::radius::RadiusModel;
use crate::renewal::QSequence;
use crate::scalar::Scalar;

/// `P(0 <-> n)` for a radius law with support in `0..=m`.
///
/// After site `l` the state is `(zeta_l, e)` with `e = M_{l+1} - l` the reach
/// excess of the furthest interval opened so far; coverage of `l + 1` needs
/// `e >= 1`, and since every reach is below `l + m`, `e <= m`. The final step
/// only asks for `xi_n = 1`. Costs `O(n^2 m)`.
pub fn forward_connectivity<T: Scalar>(
    spec: &QSequence<T>,
    model: &RadiusModel<T>,
    n: usize,
) -> Result<T> {
    if model.is_defective() {
        return Err(Error::UnboundedRadius);
    }
    let m = model.support_bound().ok_or(Error::UnboundedRadius)?;
    if n == 0 {
        return Ok(T::one());
    }
    if m == 0 {
        return Ok(T::zero());
    }
    let pmf: Vec<T> = (0..=m).map(|r| model.pmf(r)).collect();
    let qs = spec.q_prefix(n);
    let width = m + 1;
    // mass[z * width + e]
    let mut mass = vec![T::zero(); n * width];
    for (r, &p) in pmf.iter().enumerate().skip(1) {
        mass[r] = p;
    }
    let mut next = vec![T::zero(); n * width];
    for l in 0..n - 1 {
        next.iter_mut().for_each(|v| *v = T::zero());
        for z in 0..=l {
            let q = qs[z];
            for e in 1..=m {
                let w = mass[z * width + e];
                if w == T::zero() {
                    continue;
                }
                if e >= 2 {
                    next[(z + 1) * width + e - 1] += w * q;
                }
                let marked = w * (T::one() - q);
                for (r, &p) in pmf.iter().enumerate() {
                    let e2 = r.max(e - 1);
                    if e2 >= 1 {
                        next[e2] += marked * p;
                    }
                }
            }
        }
        std::mem::swap(&mut mass, &mut next);
    }
    let mut total = T::zero();
    for z in 0..n {
        let q = qs[z];
        let row: T = mass[z * width + 1..(z + 1) * width].iter().copied().sum();
        total += row * (T::one() - q);
    }
    Ok(total.min(T::one()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_site() {
        let spec = QSequence::<f64>::markov(0.3, 0.6).unwrap();
        let model = RadiusModel::table(vec![0.2, 0.5, 0.3]).unwrap();
        let p = forward_connectivity(&spec, &model, 1).unwrap();
        assert!((p - 0.7 * 0.8).abs() < 1e-15);
    }

    #[test]
    fn markov_anchor() {
        let spec = QSequence::<f64>::markov(0.3, 0.6).unwrap();
        let model = RadiusModel::table(vec![0.0, 0.5, 0.5]).unwrap();
        let p = forward_connectivity(&spec, &model, 2).unwrap();
        assert!((p - 0.55).abs() < 1e-15);
    }

    #[test]
    fn zero_radius_never_connects() {
        let spec = QSequence::constant(0.2).unwrap();
        let model = RadiusModel::table(vec![1.0]).unwrap();
        assert_eq!(forward_connectivity(&spec, &model, 0).unwrap(), 1.0);
        for n in 1..6 {
            assert_eq!(forward_connectivity(&spec, &model, n).unwrap(), 0.0);
        }
    }

    #[test]
    fn unbounded_radius_is_rejected() {
        let spec = QSequence::constant(0.2).unwrap();
        assert_eq!(
            forward_connectivity(&spec, &RadiusModel::geometric_tail(0.5).unwrap(), 3),
            Err(Error::UnboundedRadius)
        );
        assert_eq!(
            forward_connectivity(&spec, &RadiusModel::infinite(), 3),
            Err(Error::UnboundedRadius)
        );
    }
}
