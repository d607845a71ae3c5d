//! Piecewise-linear finite elements for `d/dxi [D(xi) du/dxi] = f(xi)` with
//! Dirichlet data, on uniform meshes.
//!
//! Both the stiffness coefficient and the load are sampled once per element,
//! at the midpoint, so the end nodes are never used as quadrature points.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformMesh {
    a: f64,
    b: f64,
    elements: usize,
}

impl UniformMesh {
    pub fn new(a: f64, b: f64, elements: usize) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && b > a) {
            return Err(Error::invalid(
                "mesh",
                format!("need finite a < b, got [{a}, {b}]"),
            ));
        }
        if elements < 2 {
            return Err(Error::invalid(
                "mesh",
                format!("need at least 2 elements, got {elements}"),
            ));
        }
        Ok(Self { a, b, elements })
    }

    pub fn left(&self) -> f64 {
        self.a
    }

    pub fn right(&self) -> f64 {
        self.b
    }

    pub fn elements(&self) -> usize {
        self.elements
    }

    pub fn nodes(&self) -> usize {
        self.elements + 1
    }

    pub fn spacing(&self) -> f64 {
        (self.b - self.a) / self.elements as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        if i == self.elements {
            self.b
        } else {
            self.a + i as f64 * self.spacing()
        }
    }

    pub fn midpoint(&self, e: usize) -> f64 {
        self.a + (e as f64 + 0.5) * self.spacing()
    }

    pub fn node_coords(&self) -> Vec<f64> {
        (0..self.nodes()).map(|i| self.node(i)).collect()
    }

    pub fn midpoints(&self) -> Vec<f64> {
        (0..self.elements).map(|e| self.midpoint(e)).collect()
    }
}

/// Nodal values of a piecewise-linear function.
#[derive(Debug, Clone, PartialEq)]
pub struct NodalField {
    mesh: UniformMesh,
    values: Vec<f64>,
}

impl NodalField {
    pub fn new(mesh: UniformMesh, values: Vec<f64>) -> Result<Self> {
        if values.len() != mesh.nodes() {
            return Err(Error::FieldMismatch(format!(
                "{} values for a mesh with {} nodes",
                values.len(),
                mesh.nodes()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::FieldMismatch(format!(
                "non-finite value at node {i}"
            )));
        }
        Ok(Self { mesh, values })
    }

    pub fn zeros(mesh: UniformMesh) -> Self {
        Self {
            mesh,
            values: vec![0.0; mesh.nodes()],
        }
    }

    pub fn from_fn(mesh: UniformMesh, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(mesh, mesh.node_coords().into_iter().map(f).collect())
    }

    pub fn mesh(&self) -> &UniformMesh {
        &self.mesh
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Linear interpolation; zero outside the mesh.
    pub fn eval_or_zero(&self, x: f64) -> f64 {
        let (a, b) = (self.mesh.left(), self.mesh.right());
        if x < a || x > b {
            return 0.0;
        }
        let t = (x - a) / self.mesh.spacing();
        let e = (t.floor() as usize).min(self.mesh.elements() - 1);
        let s = t - e as f64;
        (1.0 - s) * self.values[e] + s * self.values[e + 1]
    }

    /// Interpolates onto `mesh`, extending by zero beyond this field's
    /// domain.
    pub fn resample(&self, mesh: UniformMesh) -> NodalField {
        if mesh == self.mesh {
            return self.clone();
        }
        let values = mesh
            .node_coords()
            .into_iter()
            .map(|x| self.eval_or_zero(x))
            .collect();
        NodalField { mesh, values }
    }

    /// L2 norm by the trapezoidal rule on the squared nodal values.
    pub fn l2_norm(&self) -> f64 {
        trapezoid_sq(&self.values, self.mesh.spacing()).sqrt()
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

fn trapezoid_sq(values: &[f64], dx: f64) -> f64 {
    let n = values.len();
    let inner: f64 = values[1..n - 1].iter().map(|v| v * v).sum();
    dx * (inner + 0.5 * (values[0] * values[0] + values[n - 1] * values[n - 1]))
}

/// Thomas elimination for a tridiagonal system. `lower[i]` couples row
/// `i + 1` to column `i`, `upper[i]` couples row `i` to column `i + 1`.
pub fn solve_tridiagonal(
    lower: &[f64],
    diag: &[f64],
    upper: &[f64],
    rhs: &[f64],
) -> Result<Vec<f64>> {
    let n = diag.len();
    assert!(rhs.len() == n && lower.len() + 1 == n && upper.len() + 1 == n);
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut pivot = diag[0];
    if pivot == 0.0 || !pivot.is_finite() {
        return Err(Error::SingularSystem("zero pivot in row 0".into()));
    }
    if n > 1 {
        c[0] = upper[0] / pivot;
    }
    d[0] = rhs[0] / pivot;
    for i in 1..n {
        pivot = diag[i] - lower[i - 1] * c[i - 1];
        if pivot == 0.0 || !pivot.is_finite() {
            return Err(Error::SingularSystem(format!("zero pivot in row {i}")));
        }
        if i < n - 1 {
            c[i] = upper[i] / pivot;
        }
        d[i] = (rhs[i] - lower[i - 1] * d[i - 1]) / pivot;
    }
    for i in (0..n - 1).rev() {
        d[i] -= c[i] * d[i + 1];
    }
    Ok(d)
}

/// Galerkin P1 solution with element-wise coefficient and load values
/// (one per element, taken as the midpoint sample).
pub fn solve_with_element_data(
    mesh: &UniformMesh,
    coeff: &[f64],
    load: &[f64],
    u_a: f64,
    u_b: f64,
) -> Result<NodalField> {
    let ne = mesh.elements();
    assert!(coeff.len() == ne && load.len() == ne);
    if let Some(e) = coeff.iter().position(|&d| d == 0.0 || !d.is_finite()) {
        return Err(Error::SingularSystem(format!(
            "coefficient {:e} at element {e} (xi = {:e})",
            coeff[e],
            mesh.midpoint(e)
        )));
    }
    let dx = mesh.spacing();
    // Unknowns are the interior nodes 1..ne-1.
    let n = ne - 1;
    let mut diag = vec![0.0; n];
    let mut off = vec![0.0; n.saturating_sub(1)];
    let mut rhs = vec![0.0; n];
    for e in 0..ne {
        let k = coeff[e] / dx;
        let half_load = 0.5 * load[e] * dx;
        // Element e joins nodes e and e + 1; interior index is node - 1.
        for node in [e, e + 1] {
            if node >= 1 && node <= n {
                diag[node - 1] += k;
                rhs[node - 1] -= half_load;
            }
        }
        match (e, e + 1) {
            (0, _) => rhs[0] += k * u_a,
            (_, j) if j == ne => rhs[n - 1] += k * u_b,
            (i, _) => off[i - 1] = -k,
        }
    }
    let interior = solve_tridiagonal(&off, &diag, &off, &rhs)?;
    let mut values = Vec::with_capacity(ne + 1);
    values.push(u_a);
    values.extend(interior);
    values.push(u_b);
    NodalField::new(*mesh, values)
}

/// Solves `d/dxi [D du/dxi] = f` on `mesh` with `u(a) = u_a`, `u(b) = u_b`.
pub fn solve_sturm_liouville(
    coeff: impl Fn(f64) -> f64,
    source: impl Fn(f64) -> f64,
    mesh: &UniformMesh,
    u_a: f64,
    u_b: f64,
) -> Result<NodalField> {
    let mids = mesh.midpoints();
    let d: Vec<f64> = mids.iter().map(|&x| coeff(x)).collect();
    let f: Vec<f64> = mids.iter().map(|&x| source(x)).collect();
    solve_with_element_data(mesh, &d, &f, u_a, u_b)
}

/// Element-wise derivative `(u[e+1] - u[e]) / dxi`.
pub fn gradient(field: &NodalField) -> Vec<f64> {
    let dx = field.mesh.spacing();
    field
        .values
        .windows(2)
        .map(|w| (w[1] - w[0]) / dx)
        .collect()
}

/// L2 norm of `current - previous` over the domain of `current`.
///
/// Both fields must start at the same point with the same spacing; the
/// previous field is taken as zero where it does not reach.
pub fn l2_diff(current: &NodalField, previous: &NodalField) -> Result<f64> {
    let (cm, pm) = (current.mesh, previous.mesh);
    let dx = cm.spacing();
    if cm.left() != pm.left() {
        return Err(Error::FieldMismatch(format!(
            "left endpoints differ: {:e} vs {:e}",
            cm.left(),
            pm.left()
        )));
    }
    if (dx - pm.spacing()).abs() > 1e-12 * dx {
        return Err(Error::FieldMismatch(format!(
            "spacings differ: {:e} vs {:e}",
            dx,
            pm.spacing()
        )));
    }
    let diff: Vec<f64> = current
        .values
        .iter()
        .enumerate()
        .map(|(i, &c)| c - previous.values.get(i).copied().unwrap_or(0.0))
        .collect();
    Ok(trapezoid_sq(&diff, dx).sqrt())
}
