//! Helpers shared by the integration suites: deterministic generators and
//! independent oracle implementations (dense pixel-frame TPS solve, direct
//! windowed SSIM) that never touch the library's own solution paths.

#![allow(dead_code)]

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use tpswarp::{frame_center, ControlPointSet, FlowField, Image, Mat2, Vec2};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `n` points on a jittered lattice covering the frame: distinct cells with
/// bounded jitter, so the set is never close to degenerate.
pub fn jittered_points(rng: &mut ChaCha8Rng, n: usize, width: u32, height: u32) -> ControlPointSet<f64> {
    let cols = (n as f64).sqrt().ceil() as usize;
    let rows = n.div_ceil(cols);
    let cell_w = f64::from(width - 1) / cols as f64;
    let cell_h = f64::from(height - 1) / rows as f64;
    let mut cells: Vec<usize> = (0..cols * rows).collect();
    // Fisher-Yates with the deterministic stream.
    for i in (1..cells.len()).rev() {
        let j = rng.gen_range(0..=i);
        cells.swap(i, j);
    }
    let points = cells[..n]
        .iter()
        .map(|&cell| {
            let cx = (cell % cols) as f64 + 0.5 + rng.gen_range(-0.3..0.3);
            let cy = (cell / cols) as f64 + 0.5 + rng.gen_range(-0.3..0.3);
            Vec2::new(cx * cell_w, cy * cell_h)
        })
        .collect();
    ControlPointSet::new(points, width, height).expect("jittered points are finite")
}

/// Targets displaced from `sources` by bounded uniform offsets.
pub fn displaced_targets(
    rng: &mut ChaCha8Rng,
    sources: &ControlPointSet<f64>,
    amplitude: f64,
) -> ControlPointSet<f64> {
    sources
        .map_points(|p| {
            p + Vec2::new(
                rng.gen_range(-amplitude..amplitude),
                rng.gen_range(-amplitude..amplitude),
            )
        })
        .expect("displaced targets are finite")
}

/// Independent dense solve of the raw pixel-frame system.
pub struct OracleTps {
    pub sources: Vec<Vec2<f64>>,
    /// Rows: [C; M; W] stacked, columns x and y.
    pub solution: DMatrix<f64>,
}

pub fn oracle_solve(sources: &ControlPointSet<f64>, targets: &ControlPointSet<f64>) -> OracleTps {
    let n = sources.len();
    let dim = n + 3;
    let mut a = DMatrix::<f64>::zeros(dim, dim);
    let mut b = DMatrix::<f64>::zeros(dim, 2);
    let p = sources.points();
    for r in 0..n {
        a[(r, 0)] = 1.0;
        a[(r, 1)] = p[r].x;
        a[(r, 2)] = p[r].y;
        for c in 0..n {
            a[(r, 3 + c)] = kernel((p[r] - p[c]).norm());
        }
        b[(r, 0)] = targets.points()[r].x;
        b[(r, 1)] = targets.points()[r].y;
    }
    for j in 0..n {
        a[(n, 3 + j)] = 1.0;
        a[(n + 1, 3 + j)] = p[j].x;
        a[(n + 2, 3 + j)] = p[j].y;
    }
    let solution = a.lu().solve(&b).expect("oracle system is solvable");
    OracleTps {
        sources: p.to_vec(),
        solution,
    }
}

impl OracleTps {
    pub fn evaluate(&self, q: Vec2<f64>) -> Vec2<f64> {
        let n = self.sources.len();
        let s = &self.solution;
        let mut out = Vec2::new(
            s[(0, 0)] + s[(1, 0)] * q.x + s[(2, 0)] * q.y,
            s[(0, 1)] + s[(1, 1)] * q.x + s[(2, 1)] * q.y,
        );
        for i in 0..n {
            let k = kernel((q - self.sources[i]).norm());
            out += Vec2::new(s[(3 + i, 0)] * k, s[(3 + i, 1)] * k);
        }
        out
    }

    /// Raw double-sum bending energy in pixel units.
    pub fn bending_energy(&self) -> f64 {
        let n = self.sources.len();
        let s = &self.solution;
        let mut e = 0.0;
        for i in 0..n {
            for j in 0..n {
                let k = kernel((self.sources[i] - self.sources[j]).norm());
                e += (s[(3 + i, 0)] * s[(3 + j, 0)] + s[(3 + i, 1)] * s[(3 + j, 1)]) * k;
            }
        }
        e
    }
}

fn kernel(r: f64) -> f64 {
    let r_sq = r * r;
    if r_sq == 0.0 {
        0.0
    } else {
        r_sq * r_sq.ln()
    }
}

/// Backward flow of the rigid rotation by `angle_deg` about the frame centre.
pub fn rotation_flow(width: u32, height: u32, angle_deg: f64) -> FlowField<f64> {
    let center = frame_center::<f64>(width, height);
    let rot = Mat2::rotation(angle_deg.to_radians());
    FlowField::from_fn(width, height, |x, y| {
        let d = Vec2::new(f64::from(x), f64::from(y)) - center;
        rot.mul_vec(d) - d
    })
    .expect("rotation flow dims are valid")
}

/// Checkerboard with `cell`-pixel squares (spatial period 2 * cell).
pub fn checkerboard(width: u32, height: u32, cell: u32) -> Image<f64> {
    Image::from_fn(width, height, 1, |x, y, _| {
        if ((x / cell) + (y / cell)) % 2 == 0 {
            1.0
        } else {
            0.0
        }
    })
    .expect("checkerboard dims are valid")
}

pub fn random_texture(rng: &mut ChaCha8Rng, width: u32, height: u32, channels: u8) -> Image<f64> {
    let count = width as usize * height as usize * channels as usize;
    let samples = (0..count).map(|_| rng.gen_range(0.0..=1.0)).collect();
    Image::new(width, height, channels, samples).expect("random texture is in range")
}

/// Direct 2-D windowed SSIM with its own window construction; the reference
/// implementation for cross-checks.
pub fn ssim_reference(a: &Image<f64>, b: &Image<f64>) -> f64 {
    const WINDOW: usize = 11;
    const SIGMA: f64 = 1.5;
    let w = a.width() as usize;
    let h = a.height() as usize;
    let mut win = [[0.0_f64; WINDOW]; WINDOW];
    let mut wsum = 0.0;
    for (i, row) in win.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            let dy = i as f64 - 5.0;
            let dx = j as f64 - 5.0;
            *v = (-(dx * dx + dy * dy) / (2.0 * SIGMA * SIGMA)).exp();
            wsum += *v;
        }
    }
    for row in &mut win {
        for v in row.iter_mut() {
            *v /= wsum;
        }
    }
    let c1 = 0.01_f64 * 0.01;
    let c2 = 0.03_f64 * 0.03;
    let mut total = 0.0;
    for ch in 0..a.channels() {
        let mut acc = 0.0;
        let mut count = 0.0;
        for y0 in 0..=(h - WINDOW) {
            for x0 in 0..=(w - WINDOW) {
                let (mut ma, mut mb, mut aa, mut bb, mut ab) = (0.0, 0.0, 0.0, 0.0, 0.0);
                for (i, row) in win.iter().enumerate() {
                    for (j, &wv) in row.iter().enumerate() {
                        let va = a.get((x0 + j) as u32, (y0 + i) as u32, ch);
                        let vb = b.get((x0 + j) as u32, (y0 + i) as u32, ch);
                        ma += wv * va;
                        mb += wv * vb;
                        aa += wv * va * va;
                        bb += wv * vb * vb;
                        ab += wv * va * vb;
                    }
                }
                let var_a = aa - ma * ma;
                let var_b = bb - mb * mb;
                let cov = ab - ma * mb;
                acc += ((2.0 * ma * mb + c1) * (2.0 * cov + c2))
                    / ((ma * ma + mb * mb + c1) * (var_a + var_b + c2));
                count += 1.0;
            }
        }
        total += acc / count;
    }
    total / f64::from(a.channels())
}
