use crate::error::{LabError, Result};

/// Splits `name(a, b, ...)` into the name and its numeric arguments.
pub(crate) fn parse_call(input: &str) -> Result<(String, Vec<f64>)> {
    let text = input.trim();
    let open = text
        .find('(')
        .ok_or_else(|| LabError::Parse(format!("expected name(args) in '{text}'")))?;
    if !text.ends_with(')') {
        return Err(LabError::Parse(format!("missing ')' in '{text}'")));
    }
    let name = text[..open].trim().to_string();
    if name.is_empty() {
        return Err(LabError::Parse(format!("missing name in '{text}'")));
    }
    let inner = text[open + 1..text.len() - 1].trim();
    let args = if inner.is_empty() {
        Vec::new()
    } else {
        inner
            .split(',')
            .map(|a| {
                let a = a.trim();
                a.parse::<f64>()
                    .map_err(|_| LabError::Parse(format!("bad number '{a}' in '{text}'")))
            })
            .collect::<Result<Vec<_>>>()?
    };
    Ok((name, args))
}

pub(crate) fn expect_args(name: &str, args: &[f64], counts: &[usize]) -> Result<()> {
    if counts.contains(&args.len()) {
        Ok(())
    } else {
        Err(LabError::Parse(format!(
            "{name} takes {counts:?} arguments, got {}",
            args.len()
        )))
    }
}

/// Shortest round-trip representation, used by every `Display` impl of the
/// mini-languages so that printing and re-parsing is lossless.
pub(crate) fn num(x: f64) -> String {
    format!("{x}")
}
