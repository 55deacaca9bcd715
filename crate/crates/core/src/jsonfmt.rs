//! JSON output with controlled float formatting.
//!
//! Model files store reals with 17 significant digits so every `f64` survives
//! a write/read cycle bit-for-bit; reports use a fixed number of decimals.

use std::io;

use serde::Serialize;
use serde_json::ser::{CompactFormatter, Formatter, PrettyFormatter};

#[derive(Debug, Clone, Copy)]
pub enum FloatStyle {
    /// Scientific notation with 17 significant digits.
    Exact,
    /// Fixed-point with the given number of decimal places.
    Fixed(usize),
}

impl FloatStyle {
    fn render(self, value: f64) -> String {
        match self {
            FloatStyle::Exact => format!("{value:.16e}"),
            FloatStyle::Fixed(places) => format!("{value:.places$}"),
        }
    }
}

struct FloatFormatter<F> {
    inner: F,
    style: FloatStyle,
}

macro_rules! forward {
    ($($name:ident),* $(,)?) => {
        $(
            fn $name<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
                self.inner.$name(writer)
            }
        )*
    };
}

macro_rules! forward_first {
    ($($name:ident),* $(,)?) => {
        $(
            fn $name<W: ?Sized + io::Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
                self.inner.$name(writer, first)
            }
        )*
    };
}

impl<F: Formatter> Formatter for FloatFormatter<F> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(self.style.render(value).as_bytes())
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }

    forward!(begin_array, end_array, end_array_value, begin_object, end_object, begin_object_value, end_object_value);
    forward_first!(begin_array_value, begin_object_key);
}

/// Serialize `value` as compact JSON using `style` for every real number.
pub fn to_string<T: Serialize + ?Sized>(value: &T, style: FloatStyle) -> serde_json::Result<String> {
    let mut out = Vec::new();
    let formatter = FloatFormatter {
        inner: CompactFormatter,
        style,
    };
    let mut ser = serde_json::Serializer::with_formatter(&mut out, formatter);
    value.serialize(&mut ser)?;
    Ok(String::from_utf8(out).expect("serde_json emits UTF-8"))
}

/// Like [`to_string`] but indented.
pub fn to_string_pretty<T: Serialize + ?Sized>(
    value: &T,
    style: FloatStyle,
) -> serde_json::Result<String> {
    let mut out = Vec::new();
    let formatter = FloatFormatter {
        inner: PrettyFormatter::new(),
        style,
    };
    let mut ser = serde_json::Serializer::with_formatter(&mut out, formatter);
    value.serialize(&mut ser)?;
    Ok(String::from_utf8(out).expect("serde_json emits UTF-8"))
}
