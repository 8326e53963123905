use super::tensor::Tensor;

/// Adam with bias correction. Moment buffers are allocated on the first
/// step and keyed by parameter position, so the caller must pass the same
/// parameter list in the same order every step.
#[derive(Debug, Clone)]
pub struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
    step_count: u64,
}

impl Adam {
    pub fn new(lr: f64) -> Self {
        Adam { lr, beta1: 0.9, beta2: 0.999, epsilon: 1e-8, m: Vec::new(), v: Vec::new(), step_count: 0 }
    }

    pub fn step(&mut self, params: &mut [&mut Tensor], grads: &[&[f64]]) {
        assert_eq!(params.len(), grads.len(), "adam: params/grads length mismatch");
        if self.m.is_empty() {
            self.m = params.iter().map(|p| vec![0.0; p.len()]).collect();
            self.v = params.iter().map(|p| vec![0.0; p.len()]).collect();
        }
        self.step_count += 1;
        let t = self.step_count as i32;
        let bc1 = 1.0 - self.beta1.powi(t);
        let bc2 = 1.0 - self.beta2.powi(t);
        for ((param, grad), (m, v)) in
            params.iter_mut().zip(grads).zip(self.m.iter_mut().zip(self.v.iter_mut()))
        {
            assert_eq!(param.len(), grad.len(), "adam: gradient size mismatch");
            let data = param.data_mut();
            for i in 0..data.len() {
                m[i] = self.beta1 * m[i] + (1.0 - self.beta1) * grad[i];
                v[i] = self.beta2 * v[i] + (1.0 - self.beta2) * grad[i] * grad[i];
                let m_hat = m[i] / bc1;
                let v_hat = v[i] / bc2;
                data[i] -= self.lr * m_hat / (v_hat.sqrt() + self.epsilon);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn converges_on_quadratic() {
        // minimize (x - 3)^2
        let mut x = Tensor::scalar(0.0);
        let mut opt = Adam::new(0.1);
        for _ in 0..500 {
            let g = 2.0 * (x.data()[0] - 3.0);
            opt.step(&mut [&mut x], &[&[g]]);
        }
        assert!((x.data()[0] - 3.0).abs() < 1e-3);
    }

    #[test]
    fn first_step_moves_by_lr() {
        // With bias correction the first update is lr * sign(grad).
        let mut x = Tensor::scalar(1.0);
        let mut opt = Adam::new(0.01);
        opt.step(&mut [&mut x], &[&[0.5]]);
        assert!((x.data()[0] - (1.0 - 0.01)).abs() < 1e-9);
    }

    #[test]
    fn deterministic_across_runs() {
        let run = || {
            let mut x = Tensor::vector(vec![1.0, -2.0]).unwrap();
            let mut opt = Adam::new(0.05);
            for i in 0..50 {
                let g = [x.data()[0] + i as f64 * 0.1, x.data()[1] * 2.0];
                opt.step(&mut [&mut x], &[&g]);
            }
            x
        };
        assert_eq!(run(), run());
    }
}
