fn main() {
    std::process::exit(osc_cli::dispatch(std::env::args_os()));
}
