//! Composite Gauss–Legendre quadrature.

/// Nodes and weights of the m-point Gauss–Legendre rule on [-1, 1].
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; m];
    let mut w = vec![0.0; m];
    let mf = m as f64;
    for i in 0..m.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (mf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p1, mut p2) = (1.0, 0.0);
            for j in 0..m {
                let p3 = p2;
                p2 = p1;
                p1 = ((2 * j + 1) as f64 * z * p2 - j as f64 * p3) / (j + 1) as f64;
            }
            dp = mf * (z * p1 - p2) / (z * z - 1.0);
            let z1 = z;
            z = z1 - p1 / dp;
            if (z - z1).abs() < 1e-15 {
                break;
            }
        }
        x[i] = -z;
        x[m - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[m - 1 - i] = w[i];
    }
    (x, w)
}

/// A reusable composite rule: fixed nodes and weights over an interval.
#[derive(Debug, Clone)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    /// `panels` equal panels on [a, b], `order` points each.
    pub fn composite(a: f64, b: f64, panels: usize, order: usize) -> Rule {
        let (gx, gw) = gauss_legendre(order);
        let h = (b - a) / panels as f64;
        let mut nodes = Vec::with_capacity(panels * order);
        let mut weights = Vec::with_capacity(panels * order);
        for p in 0..panels {
            let lo = a + p as f64 * h;
            for (x, w) in gx.iter().zip(&gw) {
                nodes.push(lo + 0.5 * h * (x + 1.0));
                weights.push(0.5 * h * w);
            }
        }
        Rule { nodes, weights }
    }

    /// Rule for ∫_0^b f(w) dw through w = u², absorbing an integrable w^{-1/2}
    /// singularity at the origin.
    pub fn sqrt_origin(b: f64, panels: usize, order: usize) -> Rule {
        let base = Rule::composite(0.0, b.sqrt(), panels, order);
        let nodes = base.nodes.iter().map(|u| u * u).collect();
        let weights = base.nodes.iter().zip(&base.weights).map(|(u, w)| 2.0 * u * w).collect();
        Rule { nodes, weights }
    }

    /// Rule on [a, b] whose end panels are graded by w = end ± u² at the ends
    /// flagged as singular (power-type behaviour there); uniform panels of
    /// width ≤ h elsewhere.
    pub fn graded(a: f64, b: f64, h: f64, sing_a: bool, sing_b: bool, order: usize) -> Rule {
        let mut r = Rule { nodes: Vec::new(), weights: Vec::new() };
        if !(b > a) {
            return r;
        }
        let n_ends = sing_a as usize + sing_b as usize;
        let end_len = if n_ends == 0 { 0.0 } else { (4.0 * h).min((b - a) / n_ends as f64) };
        let (mut lo, mut hi) = (a, b);
        if sing_a {
            let e = Rule::sqrt_origin(end_len, 4, order);
            r.nodes.extend(e.nodes.iter().map(|u| a + u));
            r.weights.extend(e.weights);
            lo = a + end_len;
        }
        if sing_b {
            hi = b - end_len;
        }
        if hi > lo {
            let panels = (((hi - lo) / h).ceil() as usize).clamp(1, 20_000);
            r.append(Rule::composite(lo, hi, panels, order));
        }
        if sing_b {
            let e = Rule::sqrt_origin(end_len, 4, order);
            r.nodes.extend(e.nodes.iter().map(|u| b - u));
            r.weights.extend(e.weights);
        }
        r
    }

    pub fn append(&mut self, other: Rule) {
        self.nodes.extend(other.nodes);
        self.weights.extend(other.weights);
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}
