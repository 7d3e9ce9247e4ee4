//! 2-D cross-correlation over `(batch, channels, h, w)` tensors.

use crate::error::{domain, Result};
use crate::tensor::Tensor;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConvGeometry {
    pub padding: usize,
    pub stride: usize,
}

impl Default for ConvGeometry {
    fn default() -> Self {
        Self {
            padding: 0,
            stride: 1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ConvGrads {
    pub input: Tensor,
    pub weight: Tensor,
    pub bias: Tensor,
}

/// Output spatial size, or `None` when the padded input is smaller than the kernel.
pub fn conv_output_size(size: usize, kernel: usize, geom: ConvGeometry) -> Option<usize> {
    let padded = size + 2 * geom.padding;
    if padded < kernel || geom.stride == 0 {
        return None;
    }
    Some((padded - kernel) / geom.stride + 1)
}

struct Dims {
    batch: usize,
    cin: usize,
    h: usize,
    w: usize,
    cout: usize,
    k: usize,
    ho: usize,
    wo: usize,
}

fn dims(input: &Tensor, weight: &Tensor, geom: ConvGeometry) -> Result<Dims> {
    if input.rank() != 4 {
        return domain(format!("conv2d expects (batch, channels, h, w), got {:?}", input.shape()));
    }
    if weight.rank() != 4 || weight.shape()[2] != weight.shape()[3] {
        return domain(format!(
            "conv2d weight must be [out, in, k, k], got {:?}",
            weight.shape()
        ));
    }
    let [batch, cin, h, w] = [input.shape()[0], input.shape()[1], input.shape()[2], input.shape()[3]];
    let [cout, wcin, k, _] = [weight.shape()[0], weight.shape()[1], weight.shape()[2], weight.shape()[3]];
    if wcin != cin {
        return domain(format!("conv2d weight has {wcin} input channels, input has {cin}"));
    }
    let (Some(ho), Some(wo)) = (conv_output_size(h, k, geom), conv_output_size(w, k, geom)) else {
        return domain(format!(
            "conv2d input {h}x{w} with padding {} is smaller than kernel {k}",
            geom.padding
        ));
    };
    Ok(Dims {
        batch,
        cin,
        h,
        w,
        cout,
        k,
        ho,
        wo,
    })
}

/// Valid output index range `[lo, hi)` along one axis for kernel offset `kk`.
#[inline]
fn valid_range(kk: usize, pad: usize, stride: usize, size: usize, out: usize) -> (usize, usize) {
    // need 0 <= o*stride + kk - pad < size
    let lo = if kk >= pad { 0 } else { (pad - kk).div_ceil(stride) };
    let hi = if size + pad > kk {
        ((size + pad - kk - 1) / stride + 1).min(out)
    } else {
        0
    };
    (lo, hi.max(lo))
}

/// `weight: [out, in, k, k]`, `bias: [out]`.
pub fn conv2d_forward(
    input: &Tensor,
    weight: &Tensor,
    bias: &Tensor,
    geom: ConvGeometry,
) -> Result<Tensor> {
    let d = dims(input, weight, geom)?;
    bias.check_shape(&[d.cout], "conv2d bias")?;
    let (p, st) = (geom.padding, geom.stride);
    let mut y = Tensor::zeros(&[d.batch, d.cout, d.ho, d.wo]);
    let x = input.data();
    let wt = weight.data();
    let ys = y.data_mut();
    let plane_in = d.h * d.w;
    let plane_out = d.ho * d.wo;
    for b in 0..d.batch {
        for o in 0..d.cout {
            let out = &mut ys[(b * d.cout + o) * plane_out..(b * d.cout + o + 1) * plane_out];
            out.fill(bias.data()[o]);
            for c in 0..d.cin {
                let xin = &x[(b * d.cin + c) * plane_in..(b * d.cin + c + 1) * plane_in];
                for ky in 0..d.k {
                    let (oy0, oy1) = valid_range(ky, p, st, d.h, d.ho);
                    for kx in 0..d.k {
                        let wv = wt[((o * d.cin + c) * d.k + ky) * d.k + kx];
                        let (ox0, ox1) = valid_range(kx, p, st, d.w, d.wo);
                        for oy in oy0..oy1 {
                            let iy = oy * st + ky - p;
                            let orow = &mut out[oy * d.wo..(oy + 1) * d.wo];
                            let irow = &xin[iy * d.w..(iy + 1) * d.w];
                            if st == 1 {
                                let off = ox0 + kx - p;
                                for (ov, iv) in orow[ox0..ox1].iter_mut().zip(&irow[off..]) {
                                    *ov += wv * iv;
                                }
                            } else {
                                for ox in ox0..ox1 {
                                    orow[ox] += wv * irow[ox * st + kx - p];
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(y)
}

pub fn conv2d_backward(
    input: &Tensor,
    weight: &Tensor,
    upstream: &Tensor,
    geom: ConvGeometry,
) -> Result<ConvGrads> {
    let d = dims(input, weight, geom)?;
    upstream.check_shape(&[d.batch, d.cout, d.ho, d.wo], "conv2d upstream gradient")?;
    let (p, st) = (geom.padding, geom.stride);
    let x = input.data();
    let wt = weight.data();
    let up = upstream.data();
    let mut gx = Tensor::zeros(input.shape());
    let mut gw = Tensor::zeros(weight.shape());
    let mut gb = Tensor::zeros(&[d.cout]);
    let plane_in = d.h * d.w;
    let plane_out = d.ho * d.wo;
    for b in 0..d.batch {
        for o in 0..d.cout {
            let u = &up[(b * d.cout + o) * plane_out..(b * d.cout + o + 1) * plane_out];
            gb.data_mut()[o] += u.iter().sum::<f64>();
            for c in 0..d.cin {
                let in_off = (b * d.cin + c) * plane_in;
                let xin = &x[in_off..in_off + plane_in];
                for ky in 0..d.k {
                    let (oy0, oy1) = valid_range(ky, p, st, d.h, d.ho);
                    for kx in 0..d.k {
                        let widx = ((o * d.cin + c) * d.k + ky) * d.k + kx;
                        let wv = wt[widx];
                        let (ox0, ox1) = valid_range(kx, p, st, d.w, d.wo);
                        let mut acc = 0.0;
                        for oy in oy0..oy1 {
                            let iy = oy * st + ky - p;
                            let urow = &u[oy * d.wo..(oy + 1) * d.wo];
                            let irow = &xin[iy * d.w..(iy + 1) * d.w];
                            let grow = &mut gx.data_mut()
                                [in_off + iy * d.w..in_off + (iy + 1) * d.w];
                            if st == 1 {
                                let off = ox0 + kx - p;
                                let n = ox1 - ox0;
                                for ((uv, iv), gv) in urow[ox0..ox1]
                                    .iter()
                                    .zip(&irow[off..off + n])
                                    .zip(&mut grow[off..off + n])
                                {
                                    acc += uv * iv;
                                    *gv += wv * uv;
                                }
                            } else {
                                for ox in ox0..ox1 {
                                    let ix = ox * st + kx - p;
                                    acc += urow[ox] * irow[ix];
                                    grow[ix] += wv * urow[ox];
                                }
                            }
                        }
                        gw.data_mut()[widx] += acc;
                    }
                }
            }
        }
    }
    Ok(ConvGrads {
        input: gx,
        weight: gw,
        bias: gb,
    })
}
