std::string encrypt(const std::string& message, const std::string& secret) {
    unsigned char key[32];
    SHA256(reinterpret_cast<const unsigned char*>(secret.c_str()), secret.length(), key);
    EVP_CIPHER_CTX* ctx = EVP_CIPHER_CTX_new();
    EVP_EncryptInit_ex(ctx, EVP_aes_256_ecb(), NULL, key, NULL);
    std::vector<unsigned char> encrypted(message.size() + EVP_CIPHER_block_size(EVP_aes_256_ecb()));
    int len = 0, ciphertext_len = 0;
    EVP_EncryptUpdate(ctx, encrypted.data(), &len, reinterpret_cast<const unsigned char*>(message.c_str()), message.size());
    ciphertext_len += len;
