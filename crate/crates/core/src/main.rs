fn main() {
    std::process::exit(twsched::cli::main_with(std::env::args_os()));
}
