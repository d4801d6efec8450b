//! Newton interpolation through noisy-free samples of a cubic.
use horizontal_whitney::{divided_differences, newton_interpolant, NodeSet, Polynomial};

fn main() -> horizontal_whitney::Result<()> {
    let p = Polynomial::new(vec![1.0, -2.0, 0.5, 3.0]);
    let nodes = NodeSet::new(vec![-1.0, -0.2, 0.4, 1.0])?;
    let values: Vec<f64> = nodes.points().iter().map(|&x| p.eval(x)).collect();

    let dd = divided_differences(&nodes, &values)?;
    println!("divided differences: {dd:?}");
    let q = newton_interpolant(&nodes, &values)?;
    println!("recovered monomial coefficients: {:?}", q.monomial_coeffs());
    Ok(())
}
