//! Densely connected reconstruction network with path-widening fusion.
//!
//! Layout: a 3x3 stem maps RGB to `growth` channels (`f_0`). Dense layer
//! `k` (1-based) takes the concatenation `[f_0, ..., f_{k-1}]` (`k * growth`
//! channels), runs two parallel rectified 3x3 convolutions to `growth`
//! channels each, concatenates them and fuses with a rectified 1x1
//! convolution to produce `f_k`. A linear 1x1 head maps `[f_0, ..., f_D]`
//! to the output bands.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::tensor::{conv_backward, conv_forward, relu_backward_in_place, relu_in_place, ConvShape, Tensor};
use crate::error::{Error, Result};

pub const INPUT_CHANNELS: usize = 3;
pub const HEAD_INIT_SD: f64 = 0.001;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct NetworkConfig {
    pub dense_layers: usize,
    pub growth: usize,
    pub out_bands: usize,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        Self {
            dense_layers: 3,
            growth: 8,
            out_bands: 15,
        }
    }
}

impl NetworkConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dense_layers < 1 || self.growth < 2 || self.out_bands < 1 {
            return Err(Error::Config(format!(
                "network needs dense_layers >= 1, growth >= 2, out_bands >= 1; got {self:?}"
            )));
        }
        Ok(())
    }

    /// Input channels of dense layer `k` (1-based).
    pub fn dense_input_channels(&self, k: usize) -> usize {
        k * self.growth
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LayerRole {
    Stem,
    PathA(usize),
    PathB(usize),
    Fusion(usize),
    Head,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    config: NetworkConfig,
    layers: Vec<(LayerRole, ConvShape)>,
    params: Vec<f64>,
}

/// Activations kept from a forward pass for the backward pass.
#[derive(Debug, Clone)]
pub struct ForwardTrace {
    input: Tensor,
    /// `f_0..f_D`, post-activation.
    features: Vec<Tensor>,
    /// Per dense layer: the concatenated input, both rectified path
    /// outputs and their concatenation.
    dense: Vec<DenseTrace>,
    head_input: Tensor,
    pub output: Tensor,
}

#[derive(Debug, Clone)]
struct DenseTrace {
    input: Tensor,
    path_a: Tensor,
    path_b: Tensor,
    fused_input: Tensor,
}

impl Network {
    /// All-zero parameters.
    pub fn zeros(config: NetworkConfig) -> Result<Self> {
        config.validate()?;
        let mut layers = Vec::new();
        let mut offset = 0;
        let mut push = |role, c_in, c_out, k| {
            let weight_offset = offset;
            let bias_offset = weight_offset + c_out * c_in * k * k;
            offset = bias_offset + c_out;
            layers.push((
                role,
                ConvShape {
                    c_in,
                    c_out,
                    k,
                    weight_offset,
                    bias_offset,
                },
            ));
        };
        let g = config.growth;
        push(LayerRole::Stem, INPUT_CHANNELS, g, 3);
        for k in 1..=config.dense_layers {
            let c_in = config.dense_input_channels(k);
            push(LayerRole::PathA(k), c_in, g, 3);
            push(LayerRole::PathB(k), c_in, g, 3);
            push(LayerRole::Fusion(k), 2 * g, g, 1);
        }
        push(LayerRole::Head, (config.dense_layers + 1) * g, config.out_bands, 1);
        Ok(Self {
            config,
            layers,
            params: vec![0.0; offset],
        })
    }

    /// He-normal weights (`N(0, 2 / fan_in)`) everywhere except the head,
    /// which gets `N(0, 0.001^2)`; all biases zero.
    pub fn he_init(config: NetworkConfig, seed: u64) -> Result<Self> {
        let mut net = Self::zeros(config)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let unit = Normal::new(0.0, 1.0).expect("unit normal");
        for &(role, shape) in &net.layers {
            let sd = match role {
                LayerRole::Head => HEAD_INIT_SD,
                _ => (2.0 / shape.fan_in() as f64).sqrt(),
            };
            for w in &mut net.params[shape.weight_offset..shape.weight_offset + shape.weight_len()] {
                *w = sd * unit.sample(&mut rng);
            }
        }
        Ok(net)
    }

    pub fn from_params(config: NetworkConfig, params: Vec<f64>) -> Result<Self> {
        let mut net = Self::zeros(config)?;
        if params.len() != net.params.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} parameters for a network of {}",
                params.len(),
                net.params.len()
            )));
        }
        net.params = params;
        Ok(net)
    }

    pub fn config(&self) -> &NetworkConfig {
        &self.config
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn layers(&self) -> &[(LayerRole, ConvShape)] {
        &self.layers
    }

    pub fn layer(&self, role: LayerRole) -> &ConvShape {
        &self.layers.iter().find(|(r, _)| *r == role).expect("layer role").1
    }

    pub fn n_params(&self) -> usize {
        self.params.len()
    }

    /// One dense layer: `f_k` from the features before it.
    pub fn dense_forward(&self, features: &[Tensor], k: usize) -> Result<Tensor> {
        let refs: Vec<&Tensor> = features.iter().collect();
        Ok(self.dense_forward_traced(&Tensor::concat(&refs)?, k)?.0)
    }

    fn dense_forward_traced(&self, input: &Tensor, k: usize) -> Result<(Tensor, DenseTrace)> {
        let mut path_a = conv_forward(self.layer(LayerRole::PathA(k)), &self.params, input)?;
        relu_in_place(&mut path_a);
        let mut path_b = conv_forward(self.layer(LayerRole::PathB(k)), &self.params, input)?;
        relu_in_place(&mut path_b);
        let fused_input = Tensor::concat(&[&path_a, &path_b])?;
        let mut out = conv_forward(self.layer(LayerRole::Fusion(k)), &self.params, &fused_input)?;
        relu_in_place(&mut out);
        Ok((
            out,
            DenseTrace {
                input: input.clone(),
                path_a,
                path_b,
                fused_input,
            },
        ))
    }

    pub fn forward_traced(&self, input: &Tensor) -> Result<ForwardTrace> {
        let mut f0 = conv_forward(self.layer(LayerRole::Stem), &self.params, input)?;
        relu_in_place(&mut f0);
        let mut features = vec![f0];
        let mut dense = Vec::with_capacity(self.config.dense_layers);
        for k in 1..=self.config.dense_layers {
            let refs: Vec<&Tensor> = features.iter().collect();
            let cat = Tensor::concat(&refs)?;
            let (fk, trace) = self.dense_forward_traced(&cat, k)?;
            features.push(fk);
            dense.push(trace);
        }
        let refs: Vec<&Tensor> = features.iter().collect();
        let head_input = Tensor::concat(&refs)?;
        let output = conv_forward(self.layer(LayerRole::Head), &self.params, &head_input)?;
        Ok(ForwardTrace {
            input: input.clone(),
            features,
            dense,
            head_input,
            output,
        })
    }

    /// RGB tensor (3 channels, values in [0, 1]) to `out_bands` channels.
    pub fn forward(&self, input: &Tensor) -> Result<Tensor> {
        Ok(self.forward_traced(input)?.output)
    }

    /// Parameter gradient given `d_output = dL/d(output)`, accumulated into
    /// `grad`. Features feeding several later layers sum their incoming
    /// gradients.
    pub fn backward(&self, trace: &ForwardTrace, d_output: &Tensor, grad: &mut [f64]) {
        let g = self.config.growth;
        let plane = trace.input.plane();
        let d_layers = self.config.dense_layers;
        let mut d_features: Vec<Tensor> = trace.features.iter().map(|f| Tensor::zeros(f.channels, f.height, f.width)).collect();

        let add_split = |d_cat: &Tensor, d_features: &mut [Tensor]| {
            for (j, df) in d_features.iter_mut().enumerate() {
                let src = &d_cat.data[j * g * plane..(j + 1) * g * plane];
                for (a, b) in df.data.iter_mut().zip(src) {
                    *a += b;
                }
            }
        };

        let d_head_in = conv_backward(self.layer(LayerRole::Head), &self.params, &trace.head_input, d_output, grad, true)
            .expect("input gradient");
        add_split(&d_head_in, &mut d_features);

        for k in (1..=d_layers).rev() {
            let dt = &trace.dense[k - 1];
            let mut d_fk = std::mem::replace(&mut d_features[k], Tensor::zeros(0, 0, 0));
            relu_backward_in_place(&trace.features[k], &mut d_fk);
            let mut d_fused = conv_backward(self.layer(LayerRole::Fusion(k)), &self.params, &dt.fused_input, &d_fk, grad, true)
                .expect("input gradient");
            let split = g * plane;
            let mut d_a = Tensor::from_vec(g, dt.path_a.height, dt.path_a.width, d_fused.data[..split].to_vec()).expect("split");
            let mut d_b = Tensor::from_vec(g, dt.path_b.height, dt.path_b.width, d_fused.data.split_off(split)).expect("split");
            relu_backward_in_place(&dt.path_a, &mut d_a);
            relu_backward_in_place(&dt.path_b, &mut d_b);
            let mut d_in = conv_backward(self.layer(LayerRole::PathA(k)), &self.params, &dt.input, &d_a, grad, true)
                .expect("input gradient");
            let d_in_b = conv_backward(self.layer(LayerRole::PathB(k)), &self.params, &dt.input, &d_b, grad, true)
                .expect("input gradient");
            for (a, b) in d_in.data.iter_mut().zip(&d_in_b.data) {
                *a += b;
            }
            add_split(&d_in, &mut d_features[..k]);
        }

        let mut d_f0 = std::mem::replace(&mut d_features[0], Tensor::zeros(0, 0, 0));
        relu_backward_in_place(&trace.features[0], &mut d_f0);
        conv_backward(self.layer(LayerRole::Stem), &self.params, &trace.input, &d_f0, grad, false);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn channel_bookkeeping() {
        let cfg = NetworkConfig {
            dense_layers: 4,
            growth: 5,
            out_bands: 7,
        };
        let net = Network::zeros(cfg).unwrap();
        for k in 1..=4 {
            assert_eq!(net.layer(LayerRole::PathA(k)).c_in, 5 + (k - 1) * 5);
            assert_eq!(net.layer(LayerRole::Fusion(k)).c_in, 10);
        }
        assert_eq!(net.layer(LayerRole::Head).c_in, 25);
        assert_eq!(net.layer(LayerRole::Head).c_out, 7);
        assert_eq!(net.layers().len(), 1 + 3 * 4 + 1);
    }

    #[test]
    fn zero_network_outputs_zero() {
        let net = Network::zeros(NetworkConfig::default()).unwrap();
        let input = Tensor::from_vec(3, 4, 4, (0..48).map(|v| v as f64 / 48.0).collect()).unwrap();
        let out = net.forward(&input).unwrap();
        assert_eq!((out.channels, out.height, out.width), (15, 4, 4));
        assert!(out.data.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn dense_layer_rejects_wrong_channel_count() {
        let net = Network::zeros(NetworkConfig::default()).unwrap();
        let f = vec![Tensor::zeros(8, 4, 4), Tensor::zeros(3, 4, 4)];
        assert!(matches!(net.dense_forward(&f, 2), Err(Error::ShapeMismatch(_))));
        let mismatched = vec![Tensor::zeros(8, 4, 4), Tensor::zeros(8, 5, 4)];
        assert!(matches!(net.dense_forward(&mismatched, 2), Err(Error::ShapeMismatch(_))));
    }

    #[test]
    fn init_is_seeded() {
        let cfg = NetworkConfig::default();
        let a = Network::he_init(cfg, 3).unwrap();
        assert_eq!(a, Network::he_init(cfg, 3).unwrap());
        assert_ne!(a, Network::he_init(cfg, 4).unwrap());
        for (_, shape) in a.layers() {
            assert!(a.params()[shape.bias_offset..shape.bias_offset + shape.c_out].iter().all(|&b| b == 0.0));
        }
    }
}
