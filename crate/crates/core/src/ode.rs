//! Fixed-step classical Runge–Kutta integration shared by the pendulum models.

/// One classical RK4 step of `dy/dt = f(t, y)`.
pub fn rk4_step<F>(f: &F, t: f64, y: &[f64], dt: f64) -> Vec<f64>
where
    F: Fn(f64, &[f64]) -> Vec<f64>,
{
    let n = y.len();
    let k1 = f(t, y);
    let y2: Vec<f64> = (0..n).map(|i| y[i] + 0.5 * dt * k1[i]).collect();
    let k2 = f(t + 0.5 * dt, &y2);
    let y3: Vec<f64> = (0..n).map(|i| y[i] + 0.5 * dt * k2[i]).collect();
    let k3 = f(t + 0.5 * dt, &y3);
    let y4: Vec<f64> = (0..n).map(|i| y[i] + dt * k3[i]).collect();
    let k4 = f(t + dt, &y4);
    (0..n)
        .map(|i| y[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect()
}

/// Step sizes covering `[0, t_end]`: full steps of `dt`, with a shortened
/// final step when `t_end` is not a multiple of `dt`.
pub fn step_schedule(dt: f64, t_end: f64) -> Vec<f64> {
    let full = (t_end / dt).floor();
    let mut steps = vec![dt; full as usize];
    let rest = t_end - full * dt;
    if rest > dt * 1e-9 {
        steps.push(rest);
    }
    steps
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay_is_fourth_order() {
        let f = |_t: f64, y: &[f64]| vec![-y[0]];
        let run = |dt: f64| {
            let mut y = vec![1.0];
            let mut t = 0.0;
            for h in step_schedule(dt, 1.0) {
                y = rk4_step(&f, t, &y, h);
                t += h;
            }
            (y[0] - (-1.0f64).exp()).abs()
        };
        let ratio = run(0.1) / run(0.05);
        assert!(ratio > 14.0 && ratio < 18.0, "ratio {ratio}");
    }

    #[test]
    fn schedule_covers_span() {
        let s = step_schedule(0.3, 1.0);
        assert_eq!(s.len(), 4);
        assert!((s.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(step_schedule(0.1, 0.0).is_empty());
    }
}
