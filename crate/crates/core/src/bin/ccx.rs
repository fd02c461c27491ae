// SPDX-License-Identifier: MIT OR Apache-2.0

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let (code, output) = ccx_core::cli::run(&args);
    print!("{output}");
    std::process::exit(code);
}
