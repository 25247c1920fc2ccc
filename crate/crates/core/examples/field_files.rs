// Writing and reading coefficient files.

use phidiss::field::io::{read_field, write_field};
use phidiss::field::CoefficientField;
use phidiss::linalg::{CMat, C64};

pub fn run_example() -> phidiss::Result<()> {
    let a1 = CMat::from_row_slice(2, 2, &[C64::new(1.0, 0.0), C64::new(0.0, 0.25), C64::new(0.0, -0.25), C64::new(3.0, 0.0)]);
    let a2 = CMat::identity(2, 2);
    let field = CoefficientField::constant_per_h(vec![a1, a2])?;
    let mut buf = Vec::new();
    write_field(&field, &mut buf)?;
    let text = String::from_utf8(buf).expect("the writer emits UTF-8");
    println!("{text}");
    let back = read_field(text.as_bytes())?;
    println!("read back: m = {}, n = {}, per-h = {}", back.m(), back.n(), back.is_per_h());

    let broken = text.replace("0.25", "0.2x5");
    match read_field(broken.as_bytes()) {
        Err(e) => println!("malformed entry: {e}"),
        Ok(_) => println!("unexpectedly parsed"),
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> phidiss::Result<()> {
    run_example()
}
