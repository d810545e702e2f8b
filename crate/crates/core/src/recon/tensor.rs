//! Planar (channel, row, col) feature maps and stride-1 same-padded
//! convolution kernels.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    pub channels: usize,
    pub height: usize,
    pub width: usize,
    pub data: Vec<f64>,
}

impl Tensor {
    pub fn zeros(channels: usize, height: usize, width: usize) -> Self {
        Self {
            channels,
            height,
            width,
            data: vec![0.0; channels * height * width],
        }
    }

    pub fn from_vec(channels: usize, height: usize, width: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != channels * height * width {
            return Err(Error::ShapeMismatch(format!(
                "{} values for a {channels}x{height}x{width} tensor",
                data.len()
            )));
        }
        Ok(Self {
            channels,
            height,
            width,
            data,
        })
    }

    /// Planar tensor from pixel-major interleaved data (`h * w * c`).
    pub fn from_interleaved(height: usize, width: usize, channels: usize, interleaved: &[f64]) -> Result<Self> {
        if interleaved.len() != channels * height * width {
            return Err(Error::ShapeMismatch("interleaved data length".into()));
        }
        let plane = height * width;
        let mut data = vec![0.0; interleaved.len()];
        for (p, px) in interleaved.chunks_exact(channels.max(1)).enumerate() {
            for (c, &v) in px.iter().enumerate() {
                data[c * plane + p] = v;
            }
        }
        Ok(Self {
            channels,
            height,
            width,
            data,
        })
    }

    pub fn to_interleaved(&self) -> Vec<f64> {
        let plane = self.plane();
        let mut out = vec![0.0; self.data.len()];
        for c in 0..self.channels {
            for p in 0..plane {
                out[p * self.channels + c] = self.data[c * plane + p];
            }
        }
        out
    }

    #[inline]
    pub fn plane(&self) -> usize {
        self.height * self.width
    }

    #[inline]
    pub fn channel(&self, c: usize) -> &[f64] {
        let p = self.plane();
        &self.data[c * p..(c + 1) * p]
    }

    #[inline]
    pub fn get(&self, c: usize, y: usize, x: usize) -> f64 {
        self.data[(c * self.height + y) * self.width + x]
    }

    pub fn same_spatial(&self, other: &Tensor) -> bool {
        self.height == other.height && self.width == other.width
    }

    /// Channel-wise concatenation.
    pub fn concat(parts: &[&Tensor]) -> Result<Tensor> {
        let first = parts.first().ok_or_else(|| Error::ShapeMismatch("nothing to concatenate".into()))?;
        if parts.iter().any(|t| !t.same_spatial(first)) {
            return Err(Error::ShapeMismatch("concatenated features differ in spatial size".into()));
        }
        let channels = parts.iter().map(|t| t.channels).sum();
        let mut data = Vec::with_capacity(channels * first.plane());
        for t in parts {
            data.extend_from_slice(&t.data);
        }
        Ok(Tensor {
            channels,
            height: first.height,
            width: first.width,
            data,
        })
    }

    /// Spatial crop `[y0, y0 + size) x [x0, x0 + size)` of every channel.
    pub fn crop(&self, y0: usize, x0: usize, size: usize) -> Tensor {
        let mut data = Vec::with_capacity(self.channels * size * size);
        for c in 0..self.channels {
            for y in y0..y0 + size {
                let start = (c * self.height + y) * self.width + x0;
                data.extend_from_slice(&self.data[start..start + size]);
            }
        }
        Tensor {
            channels: self.channels,
            height: size,
            width: size,
            data,
        }
    }
}

/// Shape of one convolution's parameters inside a flat parameter vector.
/// Weights are laid out `[c_out][c_in][k][k]`, followed elsewhere by
/// `c_out` biases.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConvShape {
    pub c_in: usize,
    pub c_out: usize,
    pub k: usize,
    pub weight_offset: usize,
    pub bias_offset: usize,
}

impl ConvShape {
    pub fn weight_len(&self) -> usize {
        self.c_out * self.c_in * self.k * self.k
    }

    pub fn fan_in(&self) -> usize {
        self.c_in * self.k * self.k
    }

    fn weights<'a>(&self, params: &'a [f64]) -> &'a [f64] {
        &params[self.weight_offset..self.weight_offset + self.weight_len()]
    }

    fn bias<'a>(&self, params: &'a [f64]) -> &'a [f64] {
        &params[self.bias_offset..self.bias_offset + self.c_out]
    }
}

/// Overlapping row/col ranges for a kernel tap displaced by `d`.
#[inline]
fn valid_range(n: usize, d: isize) -> (usize, usize) {
    let lo = (-d).max(0) as usize;
    let hi = (n as isize - d.max(0)).max(0) as usize;
    (lo, hi.max(lo))
}

pub fn conv_forward(shape: &ConvShape, params: &[f64], input: &Tensor) -> Result<Tensor> {
    if input.channels != shape.c_in {
        return Err(Error::ShapeMismatch(format!(
            "convolution expects {} input channels, got {}",
            shape.c_in, input.channels
        )));
    }
    let (h, w, k) = (input.height, input.width, shape.k);
    let half = (k / 2) as isize;
    let plane = h * w;
    let weights = shape.weights(params);
    let bias = shape.bias(params);
    let mut out = Tensor::zeros(shape.c_out, h, w);
    for co in 0..shape.c_out {
        let dst = &mut out.data[co * plane..(co + 1) * plane];
        dst.fill(bias[co]);
        for ci in 0..shape.c_in {
            let src = input.channel(ci);
            for ky in 0..k {
                let dy = ky as isize - half;
                let (y0, y1) = valid_range(h, dy);
                for kx in 0..k {
                    let wv = weights[((co * shape.c_in + ci) * k + ky) * k + kx];
                    if wv == 0.0 {
                        continue;
                    }
                    let dx = kx as isize - half;
                    let (x0, x1) = valid_range(w, dx);
                    for y in y0..y1 {
                        let sy = (y as isize + dy) as usize;
                        let d = &mut dst[y * w + x0..y * w + x1];
                        let s = &src[sy * w + (x0 as isize + dx) as usize..sy * w + (x1 as isize + dx) as usize];
                        for (o, i) in d.iter_mut().zip(s) {
                            *o += wv * i;
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Accumulates parameter gradients into `grad` (same layout as `params`)
/// and returns the gradient with respect to the input when requested.
pub fn conv_backward(
    shape: &ConvShape,
    params: &[f64],
    input: &Tensor,
    d_out: &Tensor,
    grad: &mut [f64],
    want_input_grad: bool,
) -> Option<Tensor> {
    let (h, w, k) = (input.height, input.width, shape.k);
    let half = (k / 2) as isize;
    let plane = h * w;
    let weights = shape.weights(params);
    let mut d_in = want_input_grad.then(|| Tensor::zeros(shape.c_in, h, w));

    for co in 0..shape.c_out {
        let g = d_out.channel(co);
        grad[shape.bias_offset + co] += g.iter().sum::<f64>();
        for ci in 0..shape.c_in {
            let src = input.channel(ci);
            for ky in 0..k {
                let dy = ky as isize - half;
                let (y0, y1) = valid_range(h, dy);
                for kx in 0..k {
                    let dx = kx as isize - half;
                    let (x0, x1) = valid_range(w, dx);
                    let widx = ((co * shape.c_in + ci) * k + ky) * k + kx;
                    let wv = weights[widx];
                    let mut acc = 0.0;
                    for y in y0..y1 {
                        let sy = (y as isize + dy) as usize;
                        let go = &g[y * w + x0..y * w + x1];
                        let sx0 = (x0 as isize + dx) as usize;
                        let si = &src[sy * w + sx0..sy * w + sx0 + (x1 - x0)];
                        acc += go.iter().zip(si).map(|(a, b)| a * b).sum::<f64>();
                        if let Some(d) = d_in.as_mut() {
                            let di = &mut d.data[ci * plane + sy * w + sx0..ci * plane + sy * w + sx0 + (x1 - x0)];
                            for (o, v) in di.iter_mut().zip(go) {
                                *o += wv * v;
                            }
                        }
                    }
                    grad[shape.weight_offset + widx] += acc;
                }
            }
        }
    }
    d_in
}

pub fn relu_in_place(t: &mut Tensor) {
    for v in &mut t.data {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
}

/// Zeroes gradient entries where the rectified activation was not positive.
pub fn relu_backward_in_place(activated: &Tensor, grad: &mut Tensor) {
    for (g, &a) in grad.data.iter_mut().zip(&activated.data) {
        if a <= 0.0 {
            *g = 0.0;
        }
    }
}
