fn main() {
    std::process::exit(einselect_lab::cli::main(std::env::args_os()));
}
