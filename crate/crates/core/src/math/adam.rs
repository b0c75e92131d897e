use crate::error::{contract, Result};

/// Adam with bias correction. Moments have the shape of the parameter vector.
#[derive(Debug, Clone)]
pub struct AdamState {
    pub step: u64,
    pub first_moment: Vec<f64>,
    pub second_moment: Vec<f64>,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl AdamState {
    pub fn new(n_params: usize, learning_rate: f64) -> Self {
        Self {
            step: 0,
            first_moment: vec![0.0; n_params],
            second_moment: vec![0.0; n_params],
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }

    pub fn len(&self) -> usize {
        self.first_moment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.first_moment.is_empty()
    }

    /// One dense update of every parameter.
    pub fn step(&mut self, params: &mut [f64], grads: &[f64]) -> Result<()> {
        self.check(params, grads)?;
        self.step += 1;
        let (c1, c2) = self.corrections();
        for i in 0..params.len() {
            self.update_one(i, params, grads[i], c1, c2);
        }
        Ok(())
    }

    /// Advances the step counter but only touches the listed coordinates;
    /// the moments of all other coordinates stay frozen (lazy Adam).
    pub fn step_sparse(&mut self, params: &mut [f64], grads: &[f64], active: &[usize]) -> Result<()> {
        self.check(params, grads)?;
        contract!(
            active.iter().all(|&i| i < params.len()),
            "sparse Adam index out of range"
        );
        self.step += 1;
        let (c1, c2) = self.corrections();
        for &i in active {
            self.update_one(i, params, grads[i], c1, c2);
        }
        Ok(())
    }

    fn check(&self, params: &[f64], grads: &[f64]) -> Result<()> {
        contract!(
            params.len() == grads.len() && params.len() == self.len(),
            "adam shape mismatch: state {}, params {}, grads {}",
            self.len(),
            params.len(),
            grads.len()
        );
        Ok(())
    }

    #[inline]
    fn corrections(&self) -> (f64, f64) {
        let t = self.step as i32;
        (1.0 - self.beta1.powi(t), 1.0 - self.beta2.powi(t))
    }

    #[inline]
    fn update_one(&mut self, i: usize, params: &mut [f64], g: f64, c1: f64, c2: f64) {
        let m = &mut self.first_moment[i];
        let v = &mut self.second_moment[i];
        *m = self.beta1 * *m + (1.0 - self.beta1) * g;
        *v = self.beta2 * *v + (1.0 - self.beta2) * g * g;
        let m_hat = *m / c1;
        let v_hat = *v / c2;
        params[i] -= self.learning_rate * m_hat / (v_hat.sqrt() + self.eps);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_is_a_fixed_point() {
        let mut st = AdamState::new(3, 0.1);
        st.first_moment = vec![1.0, -1.0, 0.5];
        st.second_moment = vec![1.0, 1.0, 1.0];
        st.step = 5;
        let mut p = vec![1.0, 2.0, 3.0];
        let before_m = st.first_moment.clone();
        st.step(&mut p, &[0.0; 3]).unwrap();
        // params move only through leftover momentum, moments shrink
        for (m, b) in st.first_moment.iter().zip(&before_m) {
            assert!(m.abs() < b.abs());
        }
        let mut fresh = AdamState::new(3, 0.1);
        let mut q = vec![1.0, 2.0, 3.0];
        fresh.step(&mut q, &[0.0; 3]).unwrap();
        assert_eq!(q, vec![1.0, 2.0, 3.0]);
        assert_eq!(fresh.first_moment, vec![0.0; 3]);
    }

    #[test]
    fn first_step_moves_by_learning_rate() {
        // m_hat = 1, v_hat = 1 => delta = lr / (1 + eps)
        let mut st = AdamState::new(1, 0.001);
        let mut p = vec![0.0];
        st.step(&mut p, &[1.0]).unwrap();
        let expected = -0.001 / (1.0 + 1e-8);
        assert!((p[0] - expected).abs() < 1e-18, "{}", p[0]);
        assert_eq!(st.step, 1);
    }

    #[test]
    fn constant_gradient_moves_monotonically() {
        for g in [2.5, -0.3] {
            let mut st = AdamState::new(1, 0.01);
            let mut p = vec![0.0];
            let mut prev = 0.0;
            for t in 1..=100 {
                st.step(&mut p, &[g]).unwrap();
                assert_eq!(st.step, t);
                assert!((p[0] - prev) * g < 0.0);
                prev = p[0];
            }
        }
    }

    #[test]
    fn shape_mismatch_is_contract_error() {
        let mut st = AdamState::new(2, 0.1);
        let mut p = vec![0.0; 2];
        assert!(st.step(&mut p, &[1.0]).is_err());
        assert!(st.step_sparse(&mut p, &[1.0, 1.0], &[2]).is_err());
    }

    #[test]
    fn sparse_step_leaves_inactive_untouched() {
        let mut st = AdamState::new(3, 0.1);
        let mut p = vec![0.0; 3];
        st.step_sparse(&mut p, &[1.0, 1.0, 1.0], &[1]).unwrap();
        assert_eq!(p[0], 0.0);
        assert!(p[1] < 0.0);
        assert_eq!(st.first_moment[2], 0.0);
    }
}
