fn main() {
    std::process::exit(dmdsal_cli::run(std::env::args_os()));
}
