use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use super::{CostLedger, TspError};

/// The commonly quoted headline constant. Reports compare it against the
/// ratio derived from the cost ledger, which is larger.
pub const HEADLINE_RATIO: (i64, i64) = (185, 184);

/// `(L + k2) / (L + k1)`: the ratio between tour costs of instances whose
/// 1-in-3 optimum leaves `k2` versus `k1` clauses unsatisfied.
pub fn hardness_ratio(l: Ratio<i64>, k1: Ratio<i64>, k2: Ratio<i64>) -> Result<Ratio<i64>, TspError> {
    let zero = Ratio::from_integer(0);
    if k1 < zero || k2 < k1 || l + k1 <= zero {
        return Err(TspError::Malformed(format!(
            "ratio needs 0 <= k1 <= k2 and L > 0, got L={l} k1={k1} k2={k2}"
        )));
    }
    Ok((l + k2) / (l + k1))
}

/// Ratio of a pipeline ledger at the limiting thresholds `k1 = 0` and
/// `k2 = m/2`, side by side with [`HEADLINE_RATIO`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RatioReport {
    pub m: usize,
    pub baseline: Ratio<i64>,
    pub ratio: Ratio<i64>,
    pub headline_figure: Ratio<i64>,
}

impl RatioReport {
    pub fn from_ledger(ledger: &CostLedger) -> Option<Result<Self, TspError>> {
        let m = ledger.pipeline_m?;
        let baseline = ledger.total().to_ratio();
        let ratio = hardness_ratio(baseline, Ratio::from_integer(0), Ratio::new(m as i64, 2));
        Some(ratio.map(|ratio| RatioReport {
            m,
            baseline,
            ratio,
            headline_figure: Ratio::new(HEADLINE_RATIO.0, HEADLINE_RATIO.1),
        }))
    }

    pub fn agrees_with_headline(&self) -> bool {
        self.ratio == self.headline_figure
    }

    pub fn lines(&self) -> Vec<String> {
        let approx = |r: Ratio<i64>| *r.numer() as f64 / *r.denom() as f64;
        vec![
            format!("L = {} for m = {} (L/m = {})", self.baseline, self.m, self.baseline / self.m as i64),
            format!("ratio (L + m/2)/L = {} ≈ {:.9}", self.ratio, approx(self.ratio)),
            format!(
                "summary figure {} ≈ {:.9}: {}",
                self.headline_figure,
                approx(self.headline_figure),
                if self.agrees_with_headline() { "agrees" } else { "DIFFERS from the derived ratio" }
            ),
        ]
    }
}
