//! Central-difference jets for sampled height fields.

use super::geometry::{induced_metric, mixed_weingarten, second_fundamental_form, LocalJet, Mat2};
use super::height::SampledGrid;

struct Level1 {
    y: f64,
    dy: [f64; 2],
    ddy: Mat2,
    g: Mat2,
    phi: f64,
    w: Mat2,
}

fn level1(grid: &SampledGrid, i: isize, j: isize) -> Level1 {
    let (ht, hp) = grid.spacing();
    let y = |di: isize, dj: isize| grid.sample_ext(i + di, j + dj);
    let y0 = y(0, 0);
    let dy = [(y(1, 0) - y(-1, 0)) / (2.0 * ht), (y(0, 1) - y(0, -1)) / (2.0 * hp)];
    let d_tt = (y(1, 0) - 2.0 * y0 + y(-1, 0)) / (ht * ht);
    let d_pp = (y(0, 1) - 2.0 * y0 + y(0, -1)) / (hp * hp);
    let d_tp = (y(1, 1) - y(1, -1) - y(-1, 1) + y(-1, -1)) / (4.0 * ht * hp);
    let ddy = [[d_tt, d_tp], [d_tp, d_pp]];
    let u = grid.theta(i);
    let g = induced_metric(u, y0, dy);
    let h = second_fundamental_form(u, y0, dy, ddy);
    let w = mixed_weingarten(&g, &h);
    Level1 { y: y0, dy, ddy, g, phi: y0.sinh(), w }
}

fn map2(f: impl Fn(usize, usize) -> f64) -> Mat2 {
    [[f(0, 0), f(0, 1)], [f(1, 0), f(1, 1)]]
}

/// Local jet at grid node `(i, j)`; derivatives of the derived fields are
/// taken by a second round of central differences, with rows past the poles
/// read across them.
pub(crate) fn local_jet(grid: &SampledGrid, i: usize, j: usize) -> LocalJet {
    let (ht, hp) = grid.spacing();
    let (i, j) = (i as isize, j as isize);
    let mut st: Vec<Level1> = Vec::with_capacity(9);
    for di in -1..=1 {
        for dj in -1..=1 {
            st.push(level1(grid, i + di, j + dj));
        }
    }
    let at = |di: isize, dj: isize| &st[((di + 1) * 3 + (dj + 1)) as usize];
    let c = at(0, 0);

    let d1 = |f: &dyn Fn(&Level1) -> f64| {
        [(f(at(1, 0)) - f(at(-1, 0))) / (2.0 * ht), (f(at(0, 1)) - f(at(0, -1))) / (2.0 * hp)]
    };
    let d2 = |f: &dyn Fn(&Level1) -> f64| {
        let tt = (f(at(1, 0)) - 2.0 * f(c) + f(at(-1, 0))) / (ht * ht);
        let pp = (f(at(0, 1)) - 2.0 * f(c) + f(at(0, -1))) / (hp * hp);
        let tp = (f(at(1, 1)) - f(at(1, -1)) - f(at(-1, 1)) + f(at(-1, -1))) / (4.0 * ht * hp);
        [[tt, tp], [tp, pp]]
    };

    let mut g_d = [[[0.0; 2]; 2]; 2];
    let mut g_dd = [[[[0.0; 2]; 2]; 2]; 2];
    let mut w_d = [[[0.0; 2]; 2]; 2];
    for a in 0..2 {
        for b in 0..2 {
            let dg = d1(&|l: &Level1| l.g[a][b]);
            let ddg = d2(&|l: &Level1| l.g[a][b]);
            let dw = d1(&|l: &Level1| l.w[a][b]);
            for k in 0..2 {
                g_d[k][a][b] = dg[k];
                w_d[k][a][b] = dw[k];
                for l in 0..2 {
                    g_dd[k][l][a][b] = ddg[k][l];
                }
            }
        }
    }
    LocalJet {
        u: grid.theta(i),
        y: c.y,
        dy: c.dy,
        ddy: map2(|a, b| c.ddy[a][b]),
        g_d,
        g_dd,
        phi_d: d1(&|l: &Level1| l.phi),
        phi_dd: d2(&|l: &Level1| l.phi),
        w_d,
    }
}
