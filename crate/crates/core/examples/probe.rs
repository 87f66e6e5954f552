use slspec::*;
use std::f64::consts::PI;
fn main() {
    let q = Potential::from_parts(vec![0.0, 1.0, 2.0, PI], vec![1.0, 3.0, 0.0]).unwrap();
    let b = BoundaryParams::new(0.2, 0.0).unwrap();
    let mus = spectrum::eigenvalues(&q, b, 15).unwrap();
    println!("{:?}", &mus[..3]);
    println!("{:?}", spectrum::find_eigenvalues(&q, b, 15).err());
}
