use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::profile::format_f64;

/// Affine score `w . x + b`; predicts label index 1 when the score is positive.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearClassifier {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl LinearClassifier {
    pub fn new(weights: Vec<f64>, bias: f64) -> Result<Self> {
        if !bias.is_finite() || weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::NonFinite("classifier parameters".into()));
        }
        Ok(LinearClassifier { weights, bias })
    }

    /// Always predicts `label` (0 or 1).
    pub fn constant(n_features: usize, label: usize) -> Self {
        LinearClassifier {
            weights: vec![0.0; n_features],
            bias: if label == 1 { 1.0 } else { -1.0 },
        }
    }

    pub fn n_features(&self) -> usize {
        self.weights.len()
    }

    #[inline]
    pub fn score(&self, x: &[f64]) -> f64 {
        self.weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + self.bias
    }

    #[inline]
    pub fn predict(&self, x: &[f64]) -> usize {
        usize::from(self.score(x) > 0.0)
    }

    /// Probability of label 1 under the logistic link.
    pub fn probability(&self, x: &[f64]) -> f64 {
        let s = self.score(x);
        if s >= 0.0 {
            1.0 / (1.0 + (-s).exp())
        } else {
            let e = s.exp();
            e / (1.0 + e)
        }
    }
}

/// A distribution over linear classifiers.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomizedClassifier {
    members: Vec<LinearClassifier>,
    mix: Vec<f64>,
}

impl RandomizedClassifier {
    pub fn new(members: Vec<LinearClassifier>, mix: Vec<f64>) -> Result<Self> {
        if members.is_empty() || members.len() != mix.len() {
            return Err(Error::Shape(format!(
                "{} members with {} mixing weights",
                members.len(),
                mix.len()
            )));
        }
        let d = members[0].n_features();
        if members.iter().any(|m| m.n_features() != d) {
            return Err(Error::Shape("members disagree on feature count".into()));
        }
        if mix.iter().any(|&w| !w.is_finite() || w < 0.0) {
            return Err(Error::InvalidArgument("mixing weights must be nonnegative".into()));
        }
        let s: f64 = mix.iter().sum();
        if (s - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!("mixing weights sum to {s}")));
        }
        Ok(RandomizedClassifier { members, mix })
    }

    pub fn single(member: LinearClassifier) -> Self {
        RandomizedClassifier {
            members: vec![member],
            mix: vec![1.0],
        }
    }

    /// Equal weight on every member.
    pub fn uniform(members: Vec<LinearClassifier>) -> Result<Self> {
        let n = members.len();
        let mut mix = vec![1.0 / n as f64; n];
        if let Some(last) = mix.last_mut() {
            *last = 1.0 - (n - 1) as f64 / n as f64;
        }
        RandomizedClassifier::new(members, mix)
    }

    pub fn members(&self) -> &[LinearClassifier] {
        &self.members
    }

    pub fn mix(&self) -> &[f64] {
        &self.mix
    }

    pub fn n_features(&self) -> usize {
        self.members[0].n_features()
    }

    /// Probability of predicting label 1 at `x`.
    pub fn positive_rate(&self, x: &[f64]) -> f64 {
        self.members
            .iter()
            .zip(&self.mix)
            .map(|(m, &w)| w * m.predict(x) as f64)
            .sum()
    }

    /// Expected 0-1 loss at `x` with true label index `y`.
    pub fn expected_loss(&self, x: &[f64], y: usize) -> f64 {
        let p1 = self.positive_rate(x);
        if y == 1 {
            1.0 - p1
        } else {
            p1
        }
    }

    /// Text form: `<members> <n_features>`, then `w_1 .. w_d bias mix` per member.
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.members.len(), self.n_features());
        for (m, &w) in self.members.iter().zip(&self.mix) {
            let mut fields: Vec<String> = m.weights.iter().map(|&v| format_f64(v)).collect();
            fields.push(format_f64(m.bias));
            fields.push(format_f64(w));
            let _ = writeln!(out, "{}", fields.join(" "));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i as u64 + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());
        let (ln, head) = lines.next().ok_or_else(|| Error::parse(1, "empty model"))?;
        let head: Vec<usize> = head
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| Error::parse(ln, format!("bad count `{t}`"))))
            .collect::<Result<_>>()?;
        let [k, d] = head[..] else {
            return Err(Error::parse(ln, "header must be `<members> <n_features>`"));
        };
        let mut members = Vec::with_capacity(k);
        let mut mix = Vec::with_capacity(k);
        for _ in 0..k {
            let (ln, line) = lines.next().ok_or_else(|| Error::parse(ln + 1, "missing member line"))?;
            let vals: Vec<f64> = line
                .split_whitespace()
                .map(|t| crate::profile::parse_f64(t, ln))
                .collect::<Result<_>>()?;
            if vals.len() != d + 2 {
                return Err(Error::parse(ln, format!("expected {} numbers, found {}", d + 2, vals.len())));
            }
            members.push(LinearClassifier::new(vals[..d].to_vec(), vals[d])?);
            mix.push(vals[d + 1]);
        }
        if let Some((ln, _)) = lines.next() {
            return Err(Error::parse(ln, "trailing content after members"));
        }
        RandomizedClassifier::new(members, mix)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_round_trip_is_exact() {
        let m = RandomizedClassifier::new(
            vec![
                LinearClassifier::new(vec![0.1, -1.0 / 3.0], 2.5e-7).unwrap(),
                LinearClassifier::new(vec![1e300, 0.0], -0.0).unwrap(),
            ],
            vec![0.3, 0.7],
        )
        .unwrap();
        let back = RandomizedClassifier::from_text(&m.to_text()).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn text_errors_carry_lines() {
        let r = RandomizedClassifier::from_text("1 2\n0.1 x 0 1\n");
        assert!(matches!(r, Err(Error::Parse { line: 2, .. })));
        assert!(RandomizedClassifier::from_text("2 1\n0 0 1\n").is_err());
    }

    #[test]
    fn rejects_bad_mixtures() {
        let c = LinearClassifier::constant(1, 1);
        assert!(RandomizedClassifier::new(vec![c.clone(), c.clone()], vec![0.5, 0.6]).is_err());
        assert!(RandomizedClassifier::new(vec![c.clone()], vec![]).is_err());
        assert!(RandomizedClassifier::new(vec![c.clone(), c], vec![1.5, -0.5]).is_err());
    }

    #[test]
    fn uniform_mixture_sums_to_one() {
        let m = RandomizedClassifier::uniform(vec![LinearClassifier::constant(2, 0); 7]).unwrap();
        assert!((m.mix().iter().sum::<f64>() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn constant_predictions() {
        assert_eq!(LinearClassifier::constant(3, 1).predict(&[5.0, -2.0, 1.0]), 1);
        assert_eq!(LinearClassifier::constant(3, 0).predict(&[5.0, -2.0, 1.0]), 0);
    }
}
