from roleanalysis.main import main

main()
