fn main() {
    std::process::exit(iwasawa_cli::run(std::env::args_os()));
}
