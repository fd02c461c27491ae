// SPDX-License-Identifier: MIT OR Apache-2.0
//! Regenerates the checked-in corpus goldens from the builders.
fn main() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus");
    std::fs::create_dir_all(&dir).unwrap();
    for name in ccx_core::corpus::NAMES {
        let text = ccx_core::corpus::text(name).unwrap();
        std::fs::write(dir.join(format!("{name}.json")), text).unwrap();
        println!("wrote {name}.json");
    }
}
