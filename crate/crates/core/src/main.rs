fn main() {
    std::process::exit(gdd_core::cli_io::run_command(std::env::args_os()));
}
