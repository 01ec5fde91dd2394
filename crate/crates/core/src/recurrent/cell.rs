#![allow(clippy::needless_range_loop)]

use super::{CellConfig, GateInputs, LayerParams, SkipVariant};
use crate::error::{Error, Result};
use crate::numerics::{sigmoid, Mat};

/// Activations saved by [`cell_forward`] for the matching [`cell_backward`].
#[derive(Clone, Debug)]
pub struct StepCache {
    pub x: Mat,
    pub h_prev: Mat,
    pub c_prev: Mat,
    pub skip: Option<Mat>,
    pub i: Mat,
    pub f: Mat,
    pub o: Mat,
    /// Candidate state `s = tanh(.)`.
    pub s: Mat,
    pub c: Mat,
    pub tanh_c: Mat,
    /// Exclusive skip gate, for gated variants with a skip source.
    pub g: Option<Mat>,
    pub h: Mat,
}

/// Gradients with respect to the inputs of one cell step.
#[derive(Clone, Debug)]
pub struct CellGrads {
    pub d_x: Mat,
    pub d_h_prev: Mat,
    pub d_c_prev: Mat,
    pub d_skip: Option<Mat>,
}

fn expect_column(m: &Mat, rows: usize, op: &'static str) -> Result<()> {
    if m.shape() != (rows, 1) {
        return Err(Error::Shape {
            op,
            left: (rows, 1),
            right: m.shape(),
        });
    }
    Ok(())
}

/// Inputs `(a, b)` to the skip gate for the configured wiring.
fn gate_operands<'a>(
    cfg: CellConfig,
    x: &'a Mat,
    h_prev: &'a Mat,
    skip: &'a Mat,
) -> (&'a Mat, &'a Mat) {
    match cfg.gate_inputs {
        GateInputs::PrevAndSkip => (h_prev, skip),
        GateInputs::BelowAndPrev => (x, h_prev),
    }
}

/// One LSTM step with the configured skip wiring.
///
/// `skip` is `h_t^{l-2}` of the same direction, present only when the layer has
/// a skip source. Without it every variant reduces to the plain LSTM cell.
pub fn cell_forward(
    x: &Mat,
    h_prev: &Mat,
    c_prev: &Mat,
    skip: Option<&Mat>,
    params: &LayerParams,
    cfg: CellConfig,
) -> Result<StepCache> {
    let (m, n) = (params.input_width, params.hidden);
    expect_column(x, m, "cell_forward x")?;
    expect_column(h_prev, n, "cell_forward h_prev")?;
    expect_column(c_prev, n, "cell_forward c_prev")?;
    if let Some(sk) = skip {
        if cfg.variant == SkipVariant::NoSkip {
            return Err(Error::Config("NoSkip cell was given a skip input".into()));
        }
        expect_column(sk, n, "cell_forward skip")?;
    }

    let xh = Mat::vstack(&[x, h_prev])?;
    let mut z = params.w.value.matmul(&xh)?;
    z.add_assign(&params.b.value)?;
    if let (SkipVariant::ToGates, Some(sk)) = (cfg.variant, skip) {
        let zd = z.data_mut();
        for k in 0..4 {
            for j in 0..n {
                zd[k * n + j] += sk.data()[j];
            }
        }
    }
    let zd = z.data();
    let i = Mat::column(&zd[..n].iter().map(|&v| sigmoid(v)).collect::<Vec<_>>());
    let f = Mat::column(&zd[n..2 * n].iter().map(|&v| sigmoid(v)).collect::<Vec<_>>());
    let o = Mat::column(
        &zd[2 * n..3 * n]
            .iter()
            .map(|&v| sigmoid(v))
            .collect::<Vec<_>>(),
    );
    let s = Mat::column(&zd[3 * n..].iter().map(|&v| v.tanh()).collect::<Vec<_>>());

    let g = match skip {
        Some(sk) if cfg.variant.is_gated() => {
            let gate = params.gate.as_ref().ok_or_else(|| {
                Error::Config(format!(
                    "{} layer is missing skip-gate weights",
                    cfg.variant
                ))
            })?;
            let (a, b) = gate_operands(cfg, x, h_prev, sk);
            if a.rows() != n {
                return Err(Error::Shape {
                    op: "skip gate input",
                    left: (n, 1),
                    right: a.shape(),
                });
            }
            let mut u = gate.wg.value.matmul(a)?;
            u.add_assign(&gate.ug.value.matmul(b)?)?;
            if let Some(bias) = &gate.bias {
                u.add_assign(&bias.value)?;
            }
            Some(u.map(sigmoid))
        }
        _ => None,
    };

    let mut c = Mat::zeros(n, 1);
    {
        let cd = c.data_mut();
        for j in 0..n {
            cd[j] = f.data()[j] * c_prev.data()[j] + i.data()[j] * s.data()[j];
        }
        if let Some(sk) = skip {
            match cfg.variant {
                SkipVariant::ToInternal => {
                    for j in 0..n {
                        cd[j] += sk.data()[j];
                    }
                }
                SkipVariant::ToInternalGated => {
                    let g = g.as_ref().expect("gated");
                    for j in 0..n {
                        cd[j] += g.data()[j] * sk.data()[j];
                    }
                }
                _ => {}
            }
        }
    }
    let tanh_c = c.map(f64::tanh);
    let mut h = o.hadamard(&tanh_c)?;
    if let Some(sk) = skip {
        let hd = h.data_mut();
        match cfg.variant {
            SkipVariant::ToOutput => {
                for j in 0..n {
                    hd[j] += sk.data()[j];
                }
            }
            SkipVariant::ToOutputGated => {
                let g = g.as_ref().expect("gated");
                for j in 0..n {
                    hd[j] += g.data()[j] * sk.data()[j];
                }
            }
            SkipVariant::ToOutputGatedSigmoidMap => {
                let g = g.as_ref().expect("gated");
                for j in 0..n {
                    hd[j] += g.data()[j] * sigmoid(sk.data()[j]);
                }
            }
            _ => {}
        }
    }
    if !h.is_finite() || !c.is_finite() {
        return Err(Error::NonFinite("cell_forward"));
    }

    Ok(StepCache {
        x: x.clone(),
        h_prev: h_prev.clone(),
        c_prev: c_prev.clone(),
        skip: skip.cloned(),
        i,
        f,
        o,
        s,
        c,
        tanh_c,
        g,
        h,
    })
}

/// Reverse of [`cell_forward`]. `d_h` is the total gradient reaching `h_t`
/// and `d_c` the gradient reaching `c_t` from step `t+1`. Parameter gradients
/// are accumulated into `params`.
pub fn cell_backward(
    d_h: &Mat,
    d_c: &Mat,
    cache: &StepCache,
    params: &mut LayerParams,
    cfg: CellConfig,
) -> Result<CellGrads> {
    let (m, n) = (params.input_width, params.hidden);
    expect_column(d_h, n, "cell_backward d_h")?;
    expect_column(d_c, n, "cell_backward d_c")?;
    if cache.x.rows() != m || cache.h.rows() != n {
        return Err(Error::Shape {
            op: "cell_backward cache",
            left: (m, n),
            right: (cache.x.rows(), cache.h.rows()),
        });
    }
    let dh = d_h.data();
    let (i, f, o, s) = (
        cache.i.data(),
        cache.f.data(),
        cache.o.data(),
        cache.s.data(),
    );
    let tc = cache.tanh_c.data();
    let skip = cache.skip.as_ref().map(|m| m.data());
    let g = cache.g.as_ref().map(|m| m.data());

    let mut d_skip = skip.map(|_| vec![0.0; n]);
    let mut dg = g.map(|_| vec![0.0; n]);

    // output stage
    let mut d_o = vec![0.0; n];
    let mut dc = d_c.data().to_vec();
    for j in 0..n {
        d_o[j] = dh[j] * tc[j];
        dc[j] += dh[j] * o[j] * (1.0 - tc[j] * tc[j]);
    }
    if let (Some(sk), Some(ds)) = (skip, d_skip.as_mut()) {
        match cfg.variant {
            SkipVariant::ToOutput => {
                for j in 0..n {
                    ds[j] += dh[j];
                }
            }
            SkipVariant::ToOutputGated => {
                let (g, dg) = (g.expect("gated"), dg.as_mut().expect("gated"));
                for j in 0..n {
                    dg[j] += dh[j] * sk[j];
                    ds[j] += dh[j] * g[j];
                }
            }
            SkipVariant::ToOutputGatedSigmoidMap => {
                let (g, dg) = (g.expect("gated"), dg.as_mut().expect("gated"));
                for j in 0..n {
                    let a = sigmoid(sk[j]);
                    dg[j] += dh[j] * a;
                    ds[j] += dh[j] * g[j] * a * (1.0 - a);
                }
            }
            _ => {}
        }
    }

    // cell stage
    let c_prev = cache.c_prev.data();
    let mut dz = vec![0.0; 4 * n];
    let mut d_c_prev = vec![0.0; n];
    for j in 0..n {
        let (di, df, ds_) = (dc[j] * s[j], dc[j] * c_prev[j], dc[j] * i[j]);
        d_c_prev[j] = dc[j] * f[j];
        dz[j] = di * i[j] * (1.0 - i[j]);
        dz[n + j] = df * f[j] * (1.0 - f[j]);
        dz[2 * n + j] = d_o[j] * o[j] * (1.0 - o[j]);
        dz[3 * n + j] = ds_ * (1.0 - s[j] * s[j]);
    }
    if let (Some(sk), Some(ds)) = (skip, d_skip.as_mut()) {
        match cfg.variant {
            SkipVariant::ToInternal => {
                for j in 0..n {
                    ds[j] += dc[j];
                }
            }
            SkipVariant::ToInternalGated => {
                let (g, dg) = (g.expect("gated"), dg.as_mut().expect("gated"));
                for j in 0..n {
                    dg[j] += dc[j] * sk[j];
                    ds[j] += dc[j] * g[j];
                }
            }
            SkipVariant::ToGates => {
                for j in 0..n {
                    ds[j] += dz[j] + dz[n + j] + dz[2 * n + j] + dz[3 * n + j];
                }
            }
            _ => {}
        }
    }

    let dz = Mat::column(&dz);
    let xh = Mat::vstack(&[&cache.x, &cache.h_prev])?;
    params.w.grad.add_outer(&dz, &xh)?;
    params.b.grad.add_assign(&dz)?;
    let d_xh = params.w.value.t_matmul(&dz)?;
    let mut d_x = d_xh.rows_slice(0, m);
    let mut d_h_prev = d_xh.rows_slice(m, n);

    if let (Some(dg), Some(g), Some(sk)) = (dg, g, cache.skip.as_ref()) {
        let gate = params.gate.as_mut().ok_or_else(|| {
            Error::Config(format!(
                "{} layer is missing skip-gate weights",
                cfg.variant
            ))
        })?;
        let du = Mat::column(
            &(0..n)
                .map(|j| dg[j] * g[j] * (1.0 - g[j]))
                .collect::<Vec<_>>(),
        );
        let (a, b) = gate_operands(cfg, &cache.x, &cache.h_prev, sk);
        gate.wg.grad.add_outer(&du, a)?;
        gate.ug.grad.add_outer(&du, b)?;
        if let Some(bias) = gate.bias.as_mut() {
            bias.grad.add_assign(&du)?;
        }
        let da = gate.wg.value.t_matmul(&du)?;
        let db = gate.ug.value.t_matmul(&du)?;
        match cfg.gate_inputs {
            GateInputs::PrevAndSkip => {
                d_h_prev.add_assign(&da)?;
                let ds = d_skip.as_mut().expect("skip present");
                for j in 0..n {
                    ds[j] += db.data()[j];
                }
            }
            GateInputs::BelowAndPrev => {
                d_x.add_assign(&da)?;
                d_h_prev.add_assign(&db)?;
            }
        }
    }

    Ok(CellGrads {
        d_x,
        d_h_prev,
        d_c_prev: Mat::column(&d_c_prev),
        d_skip: d_skip.map(|v| Mat::column(&v)),
    })
}
