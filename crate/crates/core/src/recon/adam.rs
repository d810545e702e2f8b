use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    /// L2 coefficient added to the gradient as `weight_decay * param`.
    pub weight_decay: f64,
    /// Multiplicative learning-rate factor applied after every epoch.
    pub lr_decay: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            lr: 2e-4,
            beta1: 0.90,
            beta2: 0.999,
            eps: 1e-8,
            weight_decay: 1e-4,
            lr_decay: 0.98,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub config: AdamConfig,
    pub lr: f64,
    pub t: u64,
    pub m: Vec<f64>,
    pub v: Vec<f64>,
}

impl AdamState {
    pub fn new(config: AdamConfig, n_params: usize) -> Self {
        Self {
            config,
            lr: config.lr,
            t: 0,
            m: vec![0.0; n_params],
            v: vec![0.0; n_params],
        }
    }

    /// One bias-corrected Adam update of `params` in place.
    pub fn step(&mut self, params: &mut [f64], grads: &[f64]) {
        assert_eq!(params.len(), self.m.len(), "parameter count");
        assert_eq!(grads.len(), self.m.len(), "gradient count");
        let c = self.config;
        self.t += 1;
        let bc1 = 1.0 - c.beta1.powi(self.t as i32);
        let bc2 = 1.0 - c.beta2.powi(self.t as i32);
        for i in 0..params.len() {
            let g = grads[i] + c.weight_decay * params[i];
            self.m[i] = c.beta1 * self.m[i] + (1.0 - c.beta1) * g;
            self.v[i] = c.beta2 * self.v[i] + (1.0 - c.beta2) * g * g;
            let m_hat = self.m[i] / bc1;
            let v_hat = self.v[i] / bc2;
            params[i] -= self.lr * m_hat / (v_hat.sqrt() + c.eps);
        }
    }

    pub fn end_epoch(&mut self) {
        self.lr *= self.config.lr_decay;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_without_decay_is_a_no_op() {
        let cfg = AdamConfig {
            weight_decay: 0.0,
            ..Default::default()
        };
        let mut s = AdamState::new(cfg, 2);
        let mut p = [0.3, -1.2];
        s.step(&mut p, &[0.0, 0.0]);
        assert_eq!(p, [0.3, -1.2]);
    }

    #[test]
    fn weight_decay_shrinks() {
        let mut s = AdamState::new(AdamConfig::default(), 2);
        let mut p = [0.3, -1.2];
        for _ in 0..3 {
            let before = p;
            s.step(&mut p, &[0.0, 0.0]);
            assert!(p[0].abs() < before[0].abs() && p[1].abs() < before[1].abs());
        }
    }

    #[test]
    fn lr_decays_per_epoch() {
        let mut s = AdamState::new(AdamConfig::default(), 1);
        s.end_epoch();
        s.end_epoch();
        assert!((s.lr - 2e-4 * 0.98 * 0.98).abs() < 1e-18);
    }
}
