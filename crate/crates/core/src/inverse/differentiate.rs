use crate::model::TimeSeries;

/// `dA/dt` with second-order central differences inside and second-order
/// one-sided differences at both ends.
pub fn differentiate(series: &TimeSeries) -> TimeSeries {
    let grid = *series.grid();
    let v = series.values();
    let n = v.len() - 1;
    let h2 = 2.0 * grid.dt();
    let mut out = Vec::with_capacity(v.len());
    out.push((-3.0 * v[0] + 4.0 * v[1] - v[2]) / h2);
    for i in 1..n {
        out.push((v[i + 1] - v[i - 1]) / h2);
    }
    out.push((3.0 * v[n] - 4.0 * v[n - 1] + v[n - 2]) / h2);
    TimeSeries::new(grid, out).expect("same length as input")
}
