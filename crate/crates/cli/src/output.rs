use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

/// Fixed 17-significant-digit rendering; `-0` prints as `0`.
pub fn fmt(x: f64) -> String {
    format!("{:.16e}", x + 0.0)
}

/// Destination opened before any work is done, so an unwritable path fails
/// fast.
pub fn open(out: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(io::BufWriter::new(File::create(p)?)),
        None => Box::new(io::BufWriter::new(io::stdout().lock())),
    })
}

pub fn csv_writer(w: Box<dyn Write>) -> csv::Writer<Box<dyn Write>> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits() {
        assert_eq!(fmt(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt(-0.0), "0.0000000000000000e0");
        assert_eq!(fmt(-2.5), "-2.5000000000000000e0");
        for x in [0.1, 1.0 / 3.0, -7.25e-300, 6.02e23] {
            assert_eq!(fmt(x).parse::<f64>().unwrap(), x);
        }
    }
}
