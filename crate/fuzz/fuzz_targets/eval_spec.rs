#![no_main]

use libfuzzer_sys::fuzz_target;
use thermoconvex_cli::eval::{evaluate, parse_eos, parse_point, Quantity};

// Input: `quantity\neos spec\npoint`.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let mut lines = text.splitn(3, '\n');
    let (Some(q), Some(eos), Some(at)) = (lines.next(), lines.next(), lines.next()) else { return };
    let Some(quantity) = Quantity::from_name(q) else { return };
    let Ok(cfg) = parse_eos(eos) else { return };
    let Ok(model) = cfg.build() else { return };
    let Ok(point) = parse_point(at, &quantity.variables(1)) else { return };
    let _ = evaluate(&model, quantity, q, 1, &point);
});
