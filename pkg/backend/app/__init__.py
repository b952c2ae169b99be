# Este arquivo é necessário para que o Python reconheça a pasta como um pacote