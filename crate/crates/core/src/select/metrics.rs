use serde::Serialize;

use super::SelectionReport;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct Confusion {
    pub tp: usize,
    pub tn: usize,
    pub fp: usize,
    pub fn_: usize,
}

/// Confusion counts of `selected` against the true support over `p` columns.
pub fn confusion(selected: &[usize], truth: &[usize], p: usize) -> Confusion {
    let mut sel = vec![false; p];
    for &j in selected {
        sel[j] = true;
    }
    let mut tru = vec![false; p];
    for &j in truth {
        tru[j] = true;
    }
    let mut c = Confusion::default();
    for (s, t) in sel.into_iter().zip(tru) {
        match (s, t) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, true) => c.fn_ += 1,
            (false, false) => c.tn += 1,
        }
    }
    c
}

/// Support elements already lost at screening, `|𝓘 \ 𝒥|`.
pub fn stage1_loss(report: &SelectionReport, truth: &[usize]) -> usize {
    truth
        .iter()
        .filter(|j| report.leaders.binary_search(j).is_err())
        .count()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConditionDiagnostics {
    /// `#{ℓ : |σ_ℓ β_ℓ| ≥ s_n / 2}`.
    pub s_count: usize,
    /// `Σ |σ_ℓ β_ℓ|²` over `|σ_ℓ β_ℓ| ≤ 2 t_n`.
    pub tail_energy: f64,
    /// `Σ |σ_ℓ β_ℓ|`.
    pub l1_mass: f64,
    /// Smallest `|σ_ℓ β_ℓ|` over `β_ℓ ≠ 0`; infinite for an empty support.
    pub mu_min: f64,
    pub mu_n: f64,
}

impl ConditionDiagnostics {
    /// Sparsity: at most `s` large coefficients and a tail within `s log p / n`.
    pub fn sparsity_holds(&self, s: usize, p: usize, n: usize) -> bool {
        self.s_count <= s && self.tail_energy <= s as f64 * (p as f64).ln() / n as f64
    }

    pub fn size_holds(&self, m: f64) -> bool {
        self.l1_mass <= m
    }

    /// Every support element is at least `μ_n` on the normalized scale.
    pub fn significance_holds(&self) -> bool {
        self.mu_min >= self.mu_n
    }
}

pub fn check_conditions(beta: &[f64], scales: &[f64], s_n: f64, t_n: f64, mu_n: f64) -> ConditionDiagnostics {
    assert_eq!(beta.len(), scales.len(), "beta and scales lengths differ");
    let mut d = ConditionDiagnostics {
        s_count: 0,
        tail_energy: 0.0,
        l1_mass: 0.0,
        mu_min: f64::INFINITY,
        mu_n,
    };
    for (&b, &s) in beta.iter().zip(scales) {
        let v = (s * b).abs();
        if v >= s_n / 2.0 {
            d.s_count += 1;
        }
        if v <= 2.0 * t_n {
            d.tail_energy += v * v;
        }
        d.l1_mass += v;
        if b != 0.0 {
            d.mu_min = d.mu_min.min(v);
        }
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_selection() {
        let c = confusion(&[0, 1], &[0, 1], 4);
        assert_eq!(c, Confusion { tp: 2, tn: 2, fp: 0, fn_: 0 });
    }

    #[test]
    fn empty_selection() {
        let truth: Vec<usize> = (0..10).collect();
        let c = confusion(&[], &truth, 2000);
        assert_eq!(c.fn_, 10);
        assert_eq!(c.tn, 1990);
        assert_eq!(c.tp + c.tn + c.fp + c.fn_, 2000);
    }

    #[test]
    fn exact_sparse_vector() {
        let mut beta = vec![0.0; 50];
        for b in beta.iter_mut().take(10) {
            *b = 2.0;
        }
        let d = check_conditions(&beta, &[1.0; 50], 0.5, 0.1, 1.0);
        assert_eq!(d.s_count, 10);
        assert_eq!(d.tail_energy, 0.0);
        assert_eq!(d.l1_mass, 20.0);
        assert_eq!(d.mu_min, 2.0);
        assert!(d.significance_holds());
    }

    #[test]
    fn zero_vector() {
        let d = check_conditions(&[0.0; 5], &[1.0; 5], 0.5, 0.1, 1.0);
        assert_eq!(d.s_count, 0);
        assert_eq!(d.l1_mass, 0.0);
    }

    #[test]
    fn small_tail_energy() {
        let mut beta = vec![2.0; 10];
        beta.extend(std::iter::repeat(0.01).take(990));
        let d = check_conditions(&beta, &vec![1.0; 1000], 0.5, 0.5, 0.0);
        // 990 · 0.01² by direct summation.
        let oracle: f64 = (0..990).map(|_| 0.01f64 * 0.01).sum();
        assert!((d.tail_energy - oracle).abs() < 1e-15);
        assert!((d.tail_energy - 0.099).abs() < 1e-12);
    }
}
