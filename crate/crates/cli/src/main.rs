fn main() {
    std::process::exit(lmg_cli::run(std::env::args_os()));
}
