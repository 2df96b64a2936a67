fn main() {
    let args: Vec<String> = std::env::args().collect();
    std::process::exit(natcalib::cli::cli_dispatch(&args));
}
