//! Test-only oracles. Nothing here calls into the crate's solvers.

#![allow(dead_code)]

/// Erlang-B blocking probability of M/M/n/n with offered load `a`, by the
/// standard recursion `B(k) = a B(k-1) / (k + a B(k-1))`.
pub fn erlang_b(n: u32, a: f64) -> f64 {
    (1..=n).fold(1.0, |b, k| a * b / (f64::from(k) + a * b))
}

#[derive(Clone, Copy, Debug)]
pub struct OracleClass {
    pub c: f64,
    pub m: f64,
    pub lambda_l: f64,
    pub mu_l: f64,
    pub lambda_g: f64,
    pub mu_g: f64,
}

#[derive(Clone, Copy, Debug)]
pub struct OracleSite {
    pub c_total: f64,
    pub m_total: f64,
    pub c_reserved: f64,
    pub m_reserved: f64,
}

/// Brute-force stationary analysis of the reservation chain: every count
/// vector inside the bounding box is tested for feasibility, the full dense
/// generator is assembled and the balance equations are solved by Gaussian
/// elimination with partial pivoting.
pub struct BruteForce {
    pub states: Vec<(Vec<u32>, Vec<u32>)>,
    pub pi: Vec<f64>,
    pub blocking_rate: f64,
    pub dropping_rate: f64,
}

fn usage(classes: &[OracleClass], counts: &[u32]) -> (f64, f64) {
    let mut c = 0.0;
    let mut m = 0.0;
    for (k, &n) in counts.iter().enumerate() {
        c += f64::from(n) * classes[k].c;
        m += f64::from(n) * classes[k].m;
    }
    (c, m)
}

fn feasible(site: &OracleSite, classes: &[OracleClass], l: &[u32], g: &[u32]) -> bool {
    let tot: Vec<u32> = l.iter().zip(g).map(|(a, b)| a + b).collect();
    let (lc, lm) = usage(classes, l);
    let (tc, tm) = usage(classes, &tot);
    lc <= site.c_total - site.c_reserved + 1e-9
        && lm <= site.m_total - site.m_reserved + 1e-9
        && tc <= site.c_total + 1e-9
        && tm <= site.m_total + 1e-9
}

pub fn brute_force(site: OracleSite, classes: &[OracleClass]) -> BruteForce {
    let k = classes.len();
    let bound: Vec<u32> = classes
        .iter()
        .map(|cl| {
            let bc = if cl.c > 0.0 { (site.c_total / cl.c).floor() } else { f64::INFINITY };
            let bm = if cl.m > 0.0 { (site.m_total / cl.m).floor() } else { f64::INFINITY };
            bc.min(bm) as u32
        })
        .collect();
    // Odometer over (l_1..l_K, g_1..g_K).
    let dims: Vec<u32> = bound.iter().chain(bound.iter()).copied().collect();
    let mut states = Vec::new();
    let mut digits = vec![0u32; 2 * k];
    loop {
        let (l, g) = digits.split_at(k);
        if feasible(&site, classes, l, g) {
            states.push((l.to_vec(), g.to_vec()));
        }
        let mut pos = 2 * k;
        loop {
            if pos == 0 {
                break;
            }
            pos -= 1;
            if digits[pos] < dims[pos] {
                digits[pos] += 1;
                break;
            }
            digits[pos] = 0;
        }
        if digits.iter().all(|&d| d == 0) {
            break;
        }
    }
    let n = states.len();
    let find = |l: &[u32], g: &[u32]| states.iter().position(|(a, b)| a == l && b == g);
    let mut q = vec![vec![0.0; n]; n];
    for (i, (l, g)) in states.iter().enumerate() {
        for c in 0..k {
            let mut l2 = l.clone();
            l2[c] += 1;
            if let Some(j) = find(&l2, g) {
                q[i][j] += classes[c].lambda_l;
            }
            let mut g2 = g.clone();
            g2[c] += 1;
            if let Some(j) = find(l, &g2) {
                q[i][j] += classes[c].lambda_g;
            }
            if l[c] > 0 {
                let mut l3 = l.clone();
                l3[c] -= 1;
                q[i][find(&l3, g).unwrap()] += f64::from(l[c]) * classes[c].mu_l;
            }
            if g[c] > 0 {
                let mut g3 = g.clone();
                g3[c] -= 1;
                q[i][find(l, &g3).unwrap()] += f64::from(g[c]) * classes[c].mu_g;
            }
        }
        let out: f64 = q[i].iter().sum();
        q[i][i] = -out;
    }
    // pi Q = 0 as Q^T pi = 0, first equation replaced by normalization.
    let mut a: Vec<Vec<f64>> = (0..n).map(|r| (0..n).map(|c| q[c][r]).collect()).collect();
    let mut b = vec![0.0; n];
    a[0] = vec![1.0; n];
    b[0] = 1.0;
    for col in 0..n {
        let piv = (col..n).max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs())).unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            if f != 0.0 {
                let pivot_row = a[col].clone();
                for (x, p) in a[r][col..].iter_mut().zip(&pivot_row[col..]) {
                    *x -= f * p;
                }
                b[r] -= f * b[col];
            }
        }
    }
    let mut pi = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[r][c] * pi[c]).sum();
        pi[r] = (b[r] - s) / a[r][r];
    }
    let mut blocking_rate = 0.0;
    let mut dropping_rate = 0.0;
    for ((l, g), p) in states.iter().zip(&pi) {
        for c in 0..k {
            let mut l2 = l.clone();
            l2[c] += 1;
            if !feasible(&site, classes, &l2, g) {
                blocking_rate += classes[c].lambda_l * p;
            }
            let mut g2 = g.clone();
            g2[c] += 1;
            if !feasible(&site, classes, l, &g2) {
                dropping_rate += classes[c].lambda_g * p;
            }
        }
    }
    BruteForce {
        states,
        pi,
        blocking_rate,
        dropping_rate,
    }
}

pub fn fig5_classes(lambda_l: f64) -> [OracleClass; 2] {
    [
        OracleClass { c: 20.0, m: 15.0, lambda_l, mu_l: 2.0, lambda_g: 0.05, mu_g: 0.1 },
        OracleClass { c: 10.0, m: 40.0, lambda_l, mu_l: 2.0, lambda_g: 0.05, mu_g: 0.1 },
    ]
}
