fn main() {
    use nalgebra::{Complex, DMatrix};
    let m = DMatrix::<Complex<f64>>::from_row_slice(
        3,
        3,
        &[
            Complex::new(1.0, 0.5),
            Complex::new(0.0, 1.0),
            Complex::new(2.0, 0.0),
            Complex::new(0.0, 0.0),
            Complex::new(3.0, -1.0),
            Complex::new(1.0, 1.0),
            Complex::new(0.5, 0.0),
            Complex::new(0.0, 0.0),
            Complex::new(-1.0, 0.0),
        ],
    );
    let schur = m.clone().try_schur(1e-12, 10000).expect("schur failed");
    let (_q, t) = schur.unpack();
    println!("eig from schur diag: {:?}", (0..3).map(|i| t[(i, i)]).collect::<Vec<_>>());
    let svd = m.clone().svd(true, true);
    println!("singular values: {:?}", svd.singular_values.as_slice());
    let lu = m.lu();
    let inv = lu.try_inverse().expect("inverse");
    println!("inv[0,0] = {:?}", inv[(0, 0)]);
}
