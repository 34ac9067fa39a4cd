__shortname__   = "cmxprony"
__longname__    = "cmxprony: Prony fits of moment generating functions and the connected-moments expansion"
__version__     = "0.1.0"
