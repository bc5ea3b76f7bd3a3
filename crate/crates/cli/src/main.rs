fn main() {
    std::process::exit(cubic_aux_cli::run(std::env::args_os()));
}
