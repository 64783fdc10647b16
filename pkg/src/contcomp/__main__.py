from contcomp.cli import main

main()
