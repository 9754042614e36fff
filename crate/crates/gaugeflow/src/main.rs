fn main() {
    std::process::exit(gaugeflow::cli::run_cli());
}
