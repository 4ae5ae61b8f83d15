fn main() {
    std::process::exit(msaw_cli::run(std::env::args_os()));
}
