fn main() -> std::process::ExitCode {
    coinlens::cli::main()
}
