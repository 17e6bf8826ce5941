use super::kernels::{self, ConvDims};
use super::tensor::{Real, Tensor};
use crate::error::{Error, Result};

/// Handle to a value recorded on a [`Tape`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Var(usize);

impl Var {
    pub fn index(self) -> usize {
        self.0
    }
}

enum Op<T> {
    Leaf,
    Conv {
        x: Var,
        w: Var,
        b: Var,
        dims: ConvDims,
    },
    Separable {
        x: Var,
        spatial: Var,
        temporal: Var,
        b: Var,
        dims: ConvDims,
        projected: Vec<T>,
    },
    Relu {
        x: Var,
    },
    Cosine {
        a: Var,
        b: Var,
        cols: usize,
        a_hat: Vec<T>,
        b_hat: Vec<T>,
        a_norm: Vec<T>,
        b_norm: Vec<T>,
    },
    Sub {
        a: Var,
        b: Var,
    },
    Dot {
        x: Var,
        v: Var,
    },
    Sigmoid {
        z: Var,
    },
    Bce {
        p: Var,
        y: T,
    },
}

struct Node<T> {
    value: Tensor<T>,
    op: Op<T>,
    requires_grad: bool,
}

/// Records operations in execution order so gradients can be propagated in
/// reverse. Recording order is a topological order by construction.
pub struct Tape<T: Real = f32> {
    nodes: Vec<Node<T>>,
}

impl<T: Real> Default for Tape<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Real> Tape<T> {
    pub fn new() -> Self {
        Self { nodes: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn push(&mut self, value: Tensor<T>, op: Op<T>, requires_grad: bool) -> Var {
        self.nodes.push(Node {
            value,
            op,
            requires_grad,
        });
        Var(self.nodes.len() - 1)
    }

    fn rg(&self, v: Var) -> bool {
        self.nodes[v.0].requires_grad
    }

    pub fn value(&self, v: Var) -> &Tensor<T> {
        &self.nodes[v.0].value
    }

    /// Records an input. Its `requires_grad` flag decides whether a gradient
    /// is accumulated for it.
    pub fn leaf(&mut self, t: Tensor<T>) -> Var {
        let rg = t.requires_grad();
        self.push(t, Op::Leaf, rg)
    }

    /// Dense dilated convolution, `x [C, T]`, `w [O, C, K]`, `b [O]`.
    pub fn conv1d(&mut self, x: Var, w: Var, b: Var, dilation: usize) -> Result<Var> {
        let (xs, ws, bs) = (self.value(x).shape(), self.value(w).shape(), self.value(b).shape());
        if xs.len() != 2 || ws.len() != 3 || bs != [ws[0]] || ws[1] != xs[0] {
            return Err(Error::Shape(format!("conv1d: x {xs:?}, w {ws:?}, b {bs:?}")));
        }
        if dilation == 0 || ws[2] == 0 {
            return Err(Error::InvalidArgument("kernel and dilation must be >= 1".into()));
        }
        let dims = ConvDims {
            c_in: xs[0],
            c_out: ws[0],
            kernel: ws[2],
            dilation,
            t_in: xs[1],
        };
        check_len(dims)?;
        let out = kernels::conv1d_forward(self.value(x).data(), self.value(w).data(), self.value(b).data(), dims);
        let rg = self.rg(x) || self.rg(w) || self.rg(b);
        Ok(self.push(
            Tensor::from_parts(vec![dims.c_out, dims.t_out()], out),
            Op::Conv { x, w, b, dims },
            rg,
        ))
    }

    /// Separable (rank-1) dilated convolution, `spatial [O, C]`, `temporal [O, K]`.
    pub fn separable_conv1d(&mut self, x: Var, spatial: Var, temporal: Var, b: Var, dilation: usize) -> Result<Var> {
        let xs = self.value(x).shape();
        let ss = self.value(spatial).shape();
        let ts = self.value(temporal).shape();
        let bs = self.value(b).shape();
        if xs.len() != 2 || ss.len() != 2 || ts.len() != 2 || ss[1] != xs[0] || ts[0] != ss[0] || bs != [ss[0]] {
            return Err(Error::Shape(format!(
                "separable_conv1d: x {xs:?}, spatial {ss:?}, temporal {ts:?}, b {bs:?}"
            )));
        }
        if dilation == 0 || ts[1] == 0 {
            return Err(Error::InvalidArgument("kernel and dilation must be >= 1".into()));
        }
        let dims = ConvDims {
            c_in: xs[0],
            c_out: ss[0],
            kernel: ts[1],
            dilation,
            t_in: xs[1],
        };
        check_len(dims)?;
        let (out, projected) = kernels::separable_forward(
            self.value(x).data(),
            self.value(spatial).data(),
            self.value(temporal).data(),
            self.value(b).data(),
            dims,
        );
        let rg = self.rg(x) || self.rg(spatial) || self.rg(temporal) || self.rg(b);
        Ok(self.push(
            Tensor::from_parts(vec![dims.c_out, dims.t_out()], out),
            Op::Separable {
                x,
                spatial,
                temporal,
                b,
                dims,
                projected,
            },
            rg,
        ))
    }

    pub fn relu(&mut self, x: Var) -> Var {
        let v = self.value(x);
        let out = Tensor::from_parts(v.shape().to_vec(), kernels::relu_forward(v.data()));
        let rg = self.rg(x);
        self.push(out, Op::Relu { x }, rg)
    }

    /// Cosine similarity between every row of `a` and every row of `b`.
    pub fn cosine_similarity(&mut self, a: Var, b: Var) -> Result<Var> {
        let (sa, sb) = (self.value(a).shape(), self.value(b).shape());
        if sa.len() != 2 || sa != sb {
            return Err(Error::Shape(format!("cosine_similarity: {sa:?} vs {sb:?}")));
        }
        let (rows, cols) = (sa[0], sa[1]);
        let (a_hat, a_norm) = kernels::normalize_rows(self.value(a).data(), cols);
        let (b_hat, b_norm) = kernels::normalize_rows(self.value(b).data(), cols);
        let s = kernels::cosine_from_normalized(&a_hat, &b_hat, cols);
        let rg = self.rg(a) || self.rg(b);
        Ok(self.push(
            Tensor::from_parts(vec![rows, rows], s),
            Op::Cosine {
                a,
                b,
                cols,
                a_hat,
                b_hat,
                a_norm,
                b_norm,
            },
            rg,
        ))
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var> {
        let (va, vb) = (self.value(a), self.value(b));
        if va.shape() != vb.shape() {
            return Err(Error::Shape(format!("sub: {:?} vs {:?}", va.shape(), vb.shape())));
        }
        let data = va.data().iter().zip(vb.data()).map(|(x, y)| *x - *y).collect();
        let out = Tensor::from_parts(va.shape().to_vec(), data);
        let rg = self.rg(a) || self.rg(b);
        Ok(self.push(out, Op::Sub { a, b }, rg))
    }

    /// Scalar `Σ v_i x_i` over the flattened `x`; no offset term.
    pub fn dot(&mut self, x: Var, v: Var) -> Result<Var> {
        let (vx, vv) = (self.value(x), self.value(v));
        if vx.len() != vv.len() {
            return Err(Error::Shape(format!("dot: {} elements vs {}", vx.len(), vv.len())));
        }
        // Plain left-to-right sum: negating x negates every partial sum exactly.
        let s = vx
            .data()
            .iter()
            .zip(vv.data())
            .fold(T::zero(), |acc, (a, b)| acc + *a * *b);
        let rg = self.rg(x) || self.rg(v);
        Ok(self.push(Tensor::scalar(s), Op::Dot { x, v }, rg))
    }

    pub fn sigmoid(&mut self, z: Var) -> Var {
        let zt = self.value(z);
        let data = zt.data().iter().map(|&v| kernels::sigmoid(v)).collect();
        let out = Tensor::from_parts(zt.shape().to_vec(), data);
        let rg = self.rg(z);
        self.push(out, Op::Sigmoid { z }, rg)
    }

    /// Binary cross-entropy of a scalar probability against a 0/1 target.
    pub fn bce(&mut self, p: Var, y: T) -> Result<Var> {
        if y != T::zero() && y != T::one() {
            return Err(Error::InvalidArgument(format!("target must be 0 or 1, got {y:?}")));
        }
        if self.value(p).len() != 1 {
            return Err(Error::Shape("bce expects a scalar probability".into()));
        }
        let l = kernels::bce(self.value(p).item(), y);
        let rg = self.rg(p);
        Ok(self.push(Tensor::scalar(l), Op::Bce { p, y }, rg))
    }

    /// Reverse pass from a scalar root. Each recorded node is visited once,
    /// newest first.
    pub fn backward(&self, root: Var) -> Result<Grads<T>> {
        if self.value(root).len() != 1 {
            return Err(Error::Shape("backward root must be a scalar".into()));
        }
        let n = self.nodes.len();
        let mut grads: Vec<Option<Vec<T>>> = (0..n).map(|_| None).collect();
        grads[root.0] = Some(vec![T::one()]);
        let mut visits = 0usize;
        for i in (0..=root.0).rev() {
            visits += 1;
            let node = &self.nodes[i];
            if !node.requires_grad {
                continue;
            }
            let Some(g) = grads[i].take() else { continue };
            self.propagate(node, &g, &mut grads);
            grads[i] = Some(g);
        }
        Ok(Grads { grads, visits })
    }

    fn propagate(&self, node: &Node<T>, g: &[T], grads: &mut [Option<Vec<T>>]) {
        match &node.op {
            Op::Leaf => {}
            Op::Conv { x, w, b, dims } => {
                let xd = self.value(*x).data();
                let wd = self.value(*w).data();
                let mut dx = self.rg(*x).then(|| vec![T::zero(); xd.len()]);
                let mut dw = vec![T::zero(); wd.len()];
                let mut db = vec![T::zero(); dims.c_out];
                kernels::conv1d_backward(xd, wd, g, *dims, dx.as_deref_mut(), &mut dw, &mut db);
                if let Some(dx) = dx {
                    self.accumulate(grads, *x, &dx);
                }
                self.accumulate(grads, *w, &dw);
                self.accumulate(grads, *b, &db);
            }
            Op::Separable {
                x,
                spatial,
                temporal,
                b,
                dims,
                projected,
            } => {
                let xd = self.value(*x).data();
                let sd = self.value(*spatial).data();
                let td = self.value(*temporal).data();
                let mut dx = self.rg(*x).then(|| vec![T::zero(); xd.len()]);
                let mut ds = vec![T::zero(); sd.len()];
                let mut dt = vec![T::zero(); td.len()];
                let mut db = vec![T::zero(); dims.c_out];
                kernels::separable_backward(
                    xd,
                    sd,
                    td,
                    projected,
                    g,
                    *dims,
                    dx.as_deref_mut(),
                    &mut ds,
                    &mut dt,
                    &mut db,
                );
                if let Some(dx) = dx {
                    self.accumulate(grads, *x, &dx);
                }
                self.accumulate(grads, *spatial, &ds);
                self.accumulate(grads, *temporal, &dt);
                self.accumulate(grads, *b, &db);
            }
            Op::Relu { x } => {
                let xd = self.value(*x).data();
                let mut dx = vec![T::zero(); xd.len()];
                kernels::relu_backward(xd, g, &mut dx);
                self.accumulate(grads, *x, &dx);
            }
            Op::Cosine {
                a,
                b,
                cols,
                a_hat,
                b_hat,
                a_norm,
                b_norm,
            } => {
                let (dah, dbh) = kernels::cosine_backward_normalized(a_hat, b_hat, g, *cols);
                if self.rg(*a) {
                    let mut da = vec![T::zero(); a_hat.len()];
                    kernels::normalize_rows_backward(a_hat, a_norm, &dah, *cols, &mut da);
                    self.accumulate(grads, *a, &da);
                }
                if self.rg(*b) {
                    let mut db = vec![T::zero(); b_hat.len()];
                    kernels::normalize_rows_backward(b_hat, b_norm, &dbh, *cols, &mut db);
                    self.accumulate(grads, *b, &db);
                }
            }
            Op::Sub { a, b } => {
                self.accumulate(grads, *a, g);
                let neg: Vec<T> = g.iter().map(|v| -*v).collect();
                self.accumulate(grads, *b, &neg);
            }
            Op::Dot { x, v } => {
                let s = g[0];
                let xd = self.value(*x).data();
                let vd = self.value(*v).data();
                if self.rg(*x) {
                    let dx: Vec<T> = vd.iter().map(|&vi| vi * s).collect();
                    self.accumulate(grads, *x, &dx);
                }
                if self.rg(*v) {
                    let dv: Vec<T> = xd.iter().map(|&xi| xi * s).collect();
                    self.accumulate(grads, *v, &dv);
                }
            }
            Op::Sigmoid { z } => {
                let dz: Vec<T> = node
                    .value
                    .data()
                    .iter()
                    .zip(g)
                    .map(|(&p, &gi)| gi * p * (T::one() - p))
                    .collect();
                self.accumulate(grads, *z, &dz);
            }
            Op::Bce { p, y } => {
                let pv = self.value(*p).item();
                self.accumulate(grads, *p, &[g[0] * kernels::bce_grad(pv, *y)]);
            }
        }
    }

    fn accumulate(&self, grads: &mut [Option<Vec<T>>], v: Var, g: &[T]) {
        if !self.rg(v) {
            return;
        }
        match &mut grads[v.0] {
            Some(acc) => kernels::axpy(T::one(), g, acc),
            slot @ None => *slot = Some(g.to_vec()),
        }
    }
}

fn check_len(dims: ConvDims) -> Result<()> {
    let required = (dims.kernel - 1) * dims.dilation + 1;
    if dims.t_in < required {
        return Err(Error::TooShort {
            required,
            actual: dims.t_in,
        });
    }
    Ok(())
}

/// Gradients produced by [`Tape::backward`].
pub struct Grads<T> {
    grads: Vec<Option<Vec<T>>>,
    visits: usize,
}

impl<T: Real> Grads<T> {
    /// Gradient for `v`, or `None` if it does not depend on the root or
    /// does not require a gradient.
    pub fn get(&self, v: Var) -> Option<&[T]> {
        self.grads.get(v.0).and_then(|g| g.as_deref())
    }

    /// Number of nodes the reverse pass stepped through.
    pub fn visits(&self) -> usize {
        self.visits
    }
}
