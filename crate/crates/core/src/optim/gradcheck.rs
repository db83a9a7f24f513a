use crate::ndcore::Parameters;

/// Central-difference estimate of `dL/dθ` for every scalar parameter.
///
/// Each entry is perturbed by `±eps` in a private copy and restored exactly
/// before moving on.
pub fn finite_diff_grad<P, F>(mut loss: F, params: &P, eps: f64) -> P
where
    P: Parameters + Clone,
    F: FnMut(&P) -> f64,
{
    assert!(eps > 0.0, "finite difference step must be positive");
    let mut probe = params.clone();
    let mut grad = params.clone();
    grad.zero();
    let shapes: Vec<usize> = params.tensors().iter().map(|t| t.len()).collect();
    for (ti, &len) in shapes.iter().enumerate() {
        for k in 0..len {
            let orig = probe.tensors()[ti].data()[k];
            probe.tensors_mut()[ti].data_mut()[k] = orig + eps;
            let hi = loss(&probe);
            probe.tensors_mut()[ti].data_mut()[k] = orig - eps;
            let lo = loss(&probe);
            probe.tensors_mut()[ti].data_mut()[k] = orig;
            grad.tensors_mut()[ti].data_mut()[k] = (hi - lo) / (2.0 * eps);
        }
    }
    grad
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    pub checked: usize,
    pub failures: usize,
    /// Largest relative error among entries above the absolute floor.
    pub max_rel_error: f64,
    pub max_abs_error: f64,
    /// `(tensor index, entry, analytic, numeric)` of the worst entry.
    pub worst: Option<(usize, usize, f64, f64)>,
}

impl GradCheckReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

/// Entry passes when `|a − n| ≤ abs_floor` or `|a − n| / max(|a|, |n|) ≤ rel_tol`.
pub fn compare_gradients(
    analytic: &dyn Parameters,
    numeric: &dyn Parameters,
    rel_tol: f64,
    abs_floor: f64,
) -> GradCheckReport {
    let mut report = GradCheckReport {
        checked: 0,
        failures: 0,
        max_rel_error: 0.0,
        max_abs_error: 0.0,
        worst: None,
    };
    for (ti, (a, n)) in analytic.tensors().iter().zip(numeric.tensors()).enumerate() {
        for (k, (&av, &nv)) in a.data().iter().zip(n.data()).enumerate() {
            report.checked += 1;
            let diff = (av - nv).abs();
            report.max_abs_error = report.max_abs_error.max(diff);
            if diff <= abs_floor {
                continue;
            }
            let rel = diff / av.abs().max(nv.abs());
            if rel > report.max_rel_error {
                report.max_rel_error = rel;
                report.worst = Some((ti, k, av, nv));
            }
            if rel > rel_tol {
                report.failures += 1;
            }
        }
    }
    report
}
