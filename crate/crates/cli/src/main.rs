fn main() {
    std::process::exit(bbmflow_cli::dispatch(std::env::args_os()));
}
